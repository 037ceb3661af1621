#include "orars/normalize.hpp"

#include <cmath>

namespace orars {

namespace {
// Relative threshold below which a column counts as constant; exact zero
// variance is not reliable once means are rounded.
constexpr double kVarianceFloor = 1e-24;
}  // namespace

NormStats compute_norm_stats(const Dataset& dataset, const std::vector<Index>& train_indices) {
  if (train_indices.empty()) {
    throw ContractViolation("compute_norm_stats: empty training index set");
  }
  const Matrix rows = gather_rows(dataset.features(), train_indices);
  NormStats stats;
  stats.mean = rows.colwise().mean();
  const Index d = rows.cols();
  stats.stddev = Vector(d);
  const double n = static_cast<double>(rows.rows());
  for (Index c = 0; c < d; ++c) {
    const double var = (rows.col(c).array() - stats.mean[c]).square().sum() / n;
    const double scale = std::max(1.0, stats.mean[c] * stats.mean[c]);
    stats.stddev[c] = (var <= kVarianceFloor * scale) ? 0.0 : std::sqrt(var);
  }
  return stats;
}

Matrix apply_normalization(const Matrix& features, const NormStats& stats) {
  if (features.cols() != stats.mean.size()) {
    throw ContractViolation("apply_normalization: feature dim " + std::to_string(features.cols()) +
                            " != stats dim " + std::to_string(stats.mean.size()));
  }
  Matrix out(features.rows(), features.cols());
  for (Index c = 0; c < features.cols(); ++c) {
    if (stats.stddev[c] == 0.0) {
      out.col(c).setZero();
    } else {
      out.col(c) = (features.col(c).array() - stats.mean[c]) / stats.stddev[c];
    }
  }
  return out;
}

Dataset apply_normalization(const Dataset& dataset, const NormStats& stats) {
  return Dataset(dataset.name(), apply_normalization(dataset.features(), stats),
                 dataset.labels());
}

std::pair<Dataset, NormStats> normalize_features(const Dataset& dataset,
                                                 const std::vector<Index>& train_indices) {
  NormStats stats = compute_norm_stats(dataset, train_indices);
  return {apply_normalization(dataset, stats), std::move(stats)};
}

}  // namespace orars
