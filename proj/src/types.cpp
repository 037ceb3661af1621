#include "orars/types.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace orars {

Dataset::Dataset(std::string name, Matrix features, Vector labels)
    : name_(std::move(name)), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() != labels_.size()) {
    throw ContractViolation("Dataset: feature rows (" + std::to_string(features_.rows()) +
                            ") != label count (" + std::to_string(labels_.size()) + ")");
  }
  if (features_.rows() < 1) {
    throw InvalidData("Dataset '" + name_ + "': empty");
  }
  if (features_.cols() < 1) {
    throw InvalidData("Dataset '" + name_ + "': feature dimension must be positive");
  }
  if (!features_.allFinite()) {
    throw InvalidData("Dataset '" + name_ + "': non-finite feature value");
  }
  if (!labels_.allFinite()) {
    throw InvalidData("Dataset '" + name_ + "': non-finite label");
  }
}

Dataset Dataset::from_samples(std::string name, const std::vector<Sample>& samples) {
  if (samples.empty()) {
    throw InvalidData("Dataset '" + name + "': no samples");
  }
  const Index dim = samples.front().features.size();
  Matrix features(static_cast<Index>(samples.size()), dim);
  Vector labels(static_cast<Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].features.size() != dim) {
      throw InvalidData("Dataset '" + name + "': sample " + std::to_string(i) +
                        " has feature dim " + std::to_string(samples[i].features.size()) +
                        ", expected " + std::to_string(dim));
    }
    features.row(static_cast<Index>(i)) = samples[i].features.transpose();
    labels[static_cast<Index>(i)] = samples[i].label;
  }
  return Dataset(std::move(name), std::move(features), std::move(labels));
}

Dataset Dataset::subset(std::string name, const std::vector<Index>& indices) const {
  return Dataset(std::move(name), gather_rows(features_, indices), gather(labels_, indices));
}

void MetricsReport::finalize() {
  const auto n = fold_mae.size();
  if (n != fold_mse.size() || n != fold_indices.size() || n != fold_test_sizes.size()) {
    throw ContractViolation("MetricsReport: per-fold vectors have mismatched lengths");
  }
  mean_mae = mean_mse = pooled_mae = pooled_mse = 0.0;
  if (n == 0) {
    return;
  }
  double total = 0.0;
  for (std::size_t f = 0; f < n; ++f) {
    mean_mae += fold_mae[f];
    mean_mse += fold_mse[f];
    const double w = static_cast<double>(fold_test_sizes[f]);
    pooled_mae += w * fold_mae[f];
    pooled_mse += w * fold_mse[f];
    total += w;
  }
  mean_mae /= static_cast<double>(n);
  mean_mse /= static_cast<double>(n);
  pooled_mae /= total;
  pooled_mse /= total;
}

Vector gather(const Vector& values, const std::vector<Index>& indices) {
  Vector out(static_cast<Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out[static_cast<Index>(i)] = values[indices[i]];
  }
  return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<Index>& indices) {
  Matrix out(static_cast<Index>(indices.size()), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.row(static_cast<Index>(i)) = m.row(indices[i]);
  }
  return out;
}

}  // namespace orars
