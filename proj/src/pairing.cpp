#include "orars/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace orars {

int make_label(double y_i, double y_j) {
  if (!std::isfinite(y_i) || !std::isfinite(y_j)) {
    throw InvalidData("make_label: non-finite label");
  }
  return y_i > y_j ? 1 : 0;
}

double label_range(const Vector& labels) {
  if (labels.size() < 2) {
    throw ContractViolation("label_range: need at least two labels");
  }
  if (!labels.allFinite()) {
    throw InvalidData("label_range: non-finite label");
  }
  const double r = labels.maxCoeff() - labels.minCoeff();
  if (r == 0.0) {
    throw DegenerateRange("label_range: all labels identical, distance weights undefined");
  }
  return r;
}

double pair_weight(double y_i, double y_j, double range) {
  if (!(range > 0.0)) {
    throw InvalidConfig("pair_weight: range must be positive");
  }
  return std::min(std::abs(y_i - y_j) / range, 1.0);
}

PairSet::PairSet(const Dataset& dataset, std::vector<Index> indices, double range,
                 std::string source_id)
    : indices_(std::move(indices)),
      labels_(dataset.labels()),
      range_(range),
      source_id_(std::move(source_id)) {
  if (indices_.size() < 2) {
    throw ContractViolation("PairSet: need at least two indices");
  }
  if (!(range_ > 0.0)) {
    throw InvalidConfig("PairSet: range must be positive");
  }
  for (Index idx : indices_) {
    if (idx < 0 || idx >= dataset.size()) {
      throw ContractViolation("PairSet: index " + std::to_string(idx) + " out of range");
    }
  }
  count_ = indices_.size() * (indices_.size() - 1);
}

PreferencePair PairSet::at(std::size_t k) const {
  if (k >= count_) {
    throw ContractViolation("PairSet::at: pair index out of range");
  }
  const std::size_t m = indices_.size();
  const std::size_t a = k / (m - 1);
  const std::size_t r = k % (m - 1);
  const std::size_t b = r + (r >= a ? 1 : 0);
  PreferencePair p;
  p.i = indices_[a];
  p.j = indices_[b];
  const double y_i = labels_[p.i];
  const double y_j = labels_[p.j];
  p.label = make_label(y_i, y_j);
  p.weight = pair_weight(y_i, y_j, range_);
  return p;
}

CrossPairSet::CrossPairSet(const Dataset& dataset, std::vector<Index> left,
                           std::vector<Index> right, double range, std::string source_id)
    : left_(std::move(left)),
      right_(std::move(right)),
      labels_(dataset.labels()),
      range_(range),
      source_id_(std::move(source_id)) {
  if (left_.empty() || right_.empty()) {
    throw ContractViolation("CrossPairSet: both index sets must be nonempty");
  }
  if (!(range_ > 0.0)) {
    throw InvalidConfig("CrossPairSet: range must be positive");
  }
  for (Index idx : left_) {
    if (idx < 0 || idx >= dataset.size()) {
      throw ContractViolation("CrossPairSet: left index out of range");
    }
  }
  for (Index idx : right_) {
    if (idx < 0 || idx >= dataset.size()) {
      throw ContractViolation("CrossPairSet: right index out of range");
    }
  }
}

PreferencePair CrossPairSet::at(std::size_t k) const {
  if (k >= size()) {
    throw ContractViolation("CrossPairSet::at: pair index out of range");
  }
  PreferencePair p;
  p.i = left_[k / right_.size()];
  p.j = right_[k % right_.size()];
  const double y_i = labels_[p.i];
  const double y_j = labels_[p.j];
  p.label = make_label(y_i, y_j);
  p.weight = pair_weight(y_i, y_j, range_);
  return p;
}

PairSet generate_pairs(const Dataset& dataset, double range) {
  if (dataset.size() < 2) {
    throw InvalidData("generate_pairs: dataset '" + dataset.name() +
                      "' needs at least 2 samples for a cross pair");
  }
  std::vector<Index> all(static_cast<std::size_t>(dataset.size()));
  std::iota(all.begin(), all.end(), Index{0});
  return PairSet(dataset, std::move(all), range, dataset.name());
}

}  // namespace orars
