#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "orars/mlp.hpp"
#include "orars/pairing.hpp"
#include "orars/types.hpp"

namespace orars {

/// Batch/epoch schedule. Model selection is fixed: the per-epoch snapshot
/// with minimum dev loss is returned.
struct TrainConfig {
  int batch_size = 32;
  int epochs = 256;
  std::uint64_t seed = 0;

  static TrainConfig regressor_defaults(std::uint64_t seed) { return {32, 256, seed}; }

  /// 8 epochs; batch 32 below 8000 samples, 8192 otherwise.
  static TrainConfig classifier_defaults(Index dataset_size, std::uint64_t seed) {
    return {dataset_size < 8000 ? 32 : 8192, 8, seed};
  }

  void validate() const;
};

struct TrainResult {
  MlpModel model;  // snapshot with minimum dev loss
  std::vector<double> dev_loss_per_epoch;
  int best_epoch = -1;
  double best_dev_loss = std::numeric_limits<double>::infinity();
};

/// Trains the regression head with MSE loss; snapshots on dev MSE.
TrainResult train_regressor(const Eigen::Ref<const Matrix>& train_features,
                            const Eigen::Ref<const Vector>& train_targets,
                            const Eigen::Ref<const Matrix>& dev_features,
                            const Eigen::Ref<const Vector>& dev_targets,
                            const MlpConfig& mlp_config, const TrainConfig& train_config);

namespace detail {

/// Deterministic permutation of [0, n). Small domains get a true
/// Fisher-Yates shuffle; larger ones a random affine bijection
/// k -> (a*k + b) mod n, so the index space never has to materialize.
class IndexPermutation {
 public:
  IndexPermutation(std::size_t n, Rng& rng);
  std::size_t operator()(std::size_t k) const;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> table_;  // empty when affine
  std::uint64_t mult_ = 1;
  std::uint64_t offset_ = 0;
};

/// Concatenated-feature batch for a run of pair indices.
template <PairSource P>
void assemble_pair_batch(const P& pairs, const Dataset& data,
                         const std::vector<std::size_t>& pair_indices, Matrix& X, Vector& targets,
                         Vector& weights) {
  const Index n = data.feature_dim();
  const Index b = static_cast<Index>(pair_indices.size());
  X.resize(b, 2 * n);
  targets.resize(b);
  weights.resize(b);
  for (Index r = 0; r < b; ++r) {
    const PreferencePair p = pairs.at(pair_indices[static_cast<std::size_t>(r)]);
    X.block(r, 0, 1, n) = data.sample_features(p.i);
    X.block(r, n, 1, n) = data.sample_features(p.j);
    targets[r] = static_cast<double>(p.label);
    weights[r] = p.weight;
  }
}

/// Weighted cross-entropy over a whole pair source, evaluated in
/// inference mode in fixed-size chunks.
template <PairSource P>
double eval_pair_ce(const MlpModel& model, const P& pairs, const Dataset& data,
                    std::size_t chunk = 8192) {
  const std::size_t total = pairs.size();
  if (total == 0) {
    throw ContractViolation("eval_pair_ce: empty pair source");
  }
  double neg_sum = 0.0;
  Matrix X;
  Vector targets, weights;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < total; start += chunk) {
    const std::size_t end = std::min(start + chunk, total);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    assemble_pair_batch(pairs, data, idx, X, targets, weights);
    const Vector probs = forward_batch(model, X, RunMode::inference);
    neg_sum += ce_loss(targets, probs, weights) * static_cast<double>(end - start);
  }
  return neg_sum / static_cast<double>(total);
}

void check_train_setup(const MlpConfig& mlp_config, const TrainConfig& train_config);

}  // namespace detail

/// Trains the pairwise preference classifier with weighted cross-entropy on
/// concatenated feature pairs; snapshots on dev weighted CE.
template <PairSource TrainPairs, PairSource DevPairs>
TrainResult train_binary_classifier(const TrainPairs& train_pairs, const Dataset& data,
                                    const DevPairs& dev_pairs, const MlpConfig& mlp_config,
                                    const TrainConfig& train_config) {
  detail::check_train_setup(mlp_config, train_config);
  if (mlp_config.output != OutputHead::probability) {
    throw InvalidConfig("train_binary_classifier: output head must be probability");
  }
  if (mlp_config.input_dim != 2 * data.feature_dim()) {
    throw ContractViolation("train_binary_classifier: input_dim must be 2 * feature_dim");
  }
  if (train_pairs.size() == 0 || dev_pairs.size() == 0) {
    throw ContractViolation("train_binary_classifier: empty pair source");
  }

  Rng rng(train_config.seed);
  MlpModel model = MlpModel::init(mlp_config, rng);
  AdamState adam = AdamState::init(model);

  TrainResult result;
  const std::size_t total = train_pairs.size();
  const std::size_t batch = static_cast<std::size_t>(train_config.batch_size);

  Matrix X;
  Vector targets, weights;
  std::vector<std::size_t> idx;
  ForwardCache cache;

  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    detail::IndexPermutation perm(total, rng);
    for (std::size_t start = 0; start < total; start += batch) {
      const std::size_t end = std::min(start + batch, total);
      idx.resize(end - start);
      for (std::size_t k = start; k < end; ++k) {
        idx[k - start] = perm(k);
      }
      detail::assemble_pair_batch(train_pairs, data, idx, X, targets, weights);
      forward_batch(model, X, RunMode::train, &rng, &cache);
      const Gradients grads = backward(model, cache, targets, weights, LossKind::weighted_ce);
      adam_step(model, grads, adam, mlp_config.learning_rate);
    }
    const double dev_loss = detail::eval_pair_ce(model, dev_pairs, data);
    if (!std::isfinite(dev_loss)) {
      throw TrainingDiverged("train_binary_classifier: non-finite dev loss at epoch " +
                             std::to_string(epoch));
    }
    result.dev_loss_per_epoch.push_back(dev_loss);
    if (dev_loss < result.best_dev_loss) {
      result.best_dev_loss = dev_loss;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

/// Hyperparameter grids. Order is fixed (hidden units, then dropout, then
/// learning rate) so candidate indices are stable across runs.
std::vector<MlpConfig> full_grid(Index input_dim, OutputHead output);     // 48 candidates
std::vector<MlpConfig> restricted_grid(Index input_dim, OutputHead output);  // 4 candidates

/// Grid for the classifier: full up to 8000 samples, restricted above.
std::vector<MlpConfig> classifier_grid(Index input_dim, Index dataset_size);

struct GridSearchResult {
  MlpConfig best_config;
  TrainResult best_result;
  int best_index = -1;
  std::vector<double> candidate_dev_losses;  // NaN where a candidate diverged
};

/// Trains every candidate with an independent derived seed and returns the
/// one with minimum dev loss (first index wins ties). Candidates that throw
/// TrainingDiverged are skipped; if all diverge, GridSearchFailed.
GridSearchResult grid_search(
    const std::vector<MlpConfig>& candidates,
    const std::function<TrainResult(const MlpConfig&, std::uint64_t)>& train_fn,
    std::uint64_t seed, int jobs = 1);

}  // namespace orars
