#include "orars/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orars/metrics.hpp"
#include "orars/parallel.hpp"

namespace orars {

void TrainConfig::validate() const {
  if (batch_size < 1) {
    throw InvalidConfig("TrainConfig: batch_size must be positive");
  }
  if (epochs < 1) {
    throw InvalidConfig("TrainConfig: epochs must be positive");
  }
}

namespace detail {

namespace {
constexpr std::size_t kExplicitShuffleLimit = std::size_t{1} << 22;
}

IndexPermutation::IndexPermutation(std::size_t n, Rng& rng) : n_(n) {
  if (n_ == 0) {
    throw ContractViolation("IndexPermutation: empty domain");
  }
  if (n_ <= kExplicitShuffleLimit) {
    table_.resize(n_);
    std::iota(table_.begin(), table_.end(), std::uint64_t{0});
    rng.shuffle(table_);
    return;
  }
  do {
    mult_ = 1 + rng.uniform_int(n_ - 1);
  } while (std::gcd(mult_, static_cast<std::uint64_t>(n_)) != 1);
  offset_ = rng.uniform_int(n_);
}

std::size_t IndexPermutation::operator()(std::size_t k) const {
  if (k >= n_) {
    throw ContractViolation("IndexPermutation: index out of range");
  }
  if (!table_.empty()) {
    return static_cast<std::size_t>(table_[k]);
  }
  return static_cast<std::size_t>((mult_ * static_cast<std::uint64_t>(k) + offset_) %
                                  static_cast<std::uint64_t>(n_));
}

void check_train_setup(const MlpConfig& mlp_config, const TrainConfig& train_config) {
  mlp_config.validate();
  train_config.validate();
}

}  // namespace detail

TrainResult train_regressor(const Eigen::Ref<const Matrix>& train_features,
                            const Eigen::Ref<const Vector>& train_targets,
                            const Eigen::Ref<const Matrix>& dev_features,
                            const Eigen::Ref<const Vector>& dev_targets,
                            const MlpConfig& mlp_config, const TrainConfig& train_config) {
  detail::check_train_setup(mlp_config, train_config);
  if (mlp_config.output != OutputHead::regression) {
    throw InvalidConfig("train_regressor: output head must be regression");
  }
  if (train_features.rows() == 0 || dev_features.rows() == 0) {
    throw ContractViolation("train_regressor: empty train or dev set");
  }
  if (train_features.rows() != train_targets.size() || dev_features.rows() != dev_targets.size()) {
    throw ContractViolation("train_regressor: feature/target count mismatch");
  }

  Rng rng(train_config.seed);
  MlpModel model = MlpModel::init(mlp_config, rng);
  AdamState adam = AdamState::init(model);

  TrainResult result;
  const std::size_t total = static_cast<std::size_t>(train_features.rows());
  const std::size_t batch = static_cast<std::size_t>(train_config.batch_size);

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Matrix X;
  Vector y;
  ForwardCache cache;
  const Vector no_weights;

  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < total; start += batch) {
      const std::size_t end = std::min(start + batch, total);
      const Index b = static_cast<Index>(end - start);
      X.resize(b, train_features.cols());
      y.resize(b);
      for (Index r = 0; r < b; ++r) {
        const Index src = static_cast<Index>(order[start + static_cast<std::size_t>(r)]);
        X.row(r) = train_features.row(src);
        y[r] = train_targets[src];
      }
      forward_batch(model, X, RunMode::train, &rng, &cache);
      const Gradients grads = backward(model, cache, y, no_weights, LossKind::mse);
      adam_step(model, grads, adam, mlp_config.learning_rate);
    }
    const Vector dev_pred = forward_batch(model, dev_features, RunMode::inference);
    const double dev_loss = mse(dev_pred, dev_targets);
    if (!std::isfinite(dev_loss)) {
      throw TrainingDiverged("train_regressor: non-finite dev loss at epoch " +
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

namespace {

std::vector<MlpConfig> build_grid(Index input_dim, OutputHead output,
                                  const std::vector<Index>& hidden,
                                  const std::vector<double>& dropout,
                                  const std::vector<double>& lr) {
  std::vector<MlpConfig> grid;
  grid.reserve(hidden.size() * dropout.size() * lr.size());
  for (Index h : hidden) {
    for (double dr : dropout) {
      for (double l : lr) {
        MlpConfig c;
        c.input_dim = input_dim;
        c.hidden_units = h;
        c.dropout_rate = dr;
        c.learning_rate = l;
        c.output = output;
        grid.push_back(c);
      }
    }
  }
  return grid;
}

}  // namespace

std::vector<MlpConfig> full_grid(Index input_dim, OutputHead output) {
  return build_grid(input_dim, output, {16, 32, 64, 128}, {0.0, 0.1, 0.3, 0.5},
                    {0.01, 0.001, 0.0001});
}

std::vector<MlpConfig> restricted_grid(Index input_dim, OutputHead output) {
  return build_grid(input_dim, output, {32, 64}, {0.0}, {0.001, 0.0001});
}

std::vector<MlpConfig> classifier_grid(Index input_dim, Index dataset_size) {
  return dataset_size > 8000 ? restricted_grid(input_dim, OutputHead::probability)
                             : full_grid(input_dim, OutputHead::probability);
}

GridSearchResult grid_search(
    const std::vector<MlpConfig>& candidates,
    const std::function<TrainResult(const MlpConfig&, std::uint64_t)>& train_fn,
    std::uint64_t seed, int jobs) {
  if (candidates.empty()) {
    throw InvalidConfig("grid_search: empty candidate space");
  }
  const Rng root(seed);
  std::vector<TrainResult> results(candidates.size());
  std::vector<double> losses(candidates.size(), std::numeric_limits<double>::quiet_NaN());

  parallel_for(candidates.size(), jobs, [&](std::size_t i) {
    try {
      results[i] = train_fn(candidates[i], root.child(i).seed());
      losses[i] = results[i].best_dev_loss;
    } catch (const TrainingDiverged&) {
      // marked by the NaN already in place
    }
  });

  int best = -1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (std::isfinite(losses[i]) && (best < 0 || losses[i] < losses[static_cast<std::size_t>(best)])) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    throw GridSearchFailed("grid_search: every candidate diverged");
  }

  GridSearchResult out;
  out.best_config = candidates[static_cast<std::size_t>(best)];
  out.best_result = std::move(results[static_cast<std::size_t>(best)]);
  out.best_index = best;
  out.candidate_dev_losses = std::move(losses);
  return out;
}

}  // namespace orars
