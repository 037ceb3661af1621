#pragma once

#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "orars/types.hpp"

namespace orars {

/// An ordered sample pair with its ordinal label and distance weight.
struct PreferencePair {
  Index i = 0;  // first sample (test-side position at inference)
  Index j = 0;  // second sample (anchor-side position)
  int label = 0;
  double weight = 0.0;
};

/// 1 if y_i outranks y_j, 0 otherwise (ties fall in the 0 branch).
int make_label(double y_i, double y_j);

/// max - min over the given labels. Throws DegenerateRange when all values
/// are identical, since distance weights would be undefined.
double label_range(const Vector& labels);

/// |y_i - y_j| / range, clamped to [0, 1]. Scores outside the training range
/// can otherwise push the ratio above 1 at inference time.
double pair_weight(double y_i, double y_j, double range);

/// Anything that can enumerate preference pairs by flat index.
template <class T>
concept PairSource = requires(const T& s, std::size_t k) {
  { s.size() } -> std::convertible_to<std::size_t>;
  { s.at(k) } -> std::convertible_to<PreferencePair>;
};

/// All ordered pairs (i, j), i != j, over an index subset of one dataset.
/// Pairs are computed on demand; only the labels are copied, so the set
/// stays O(m) in memory for m^2 - m pairs.
class PairSet {
 public:
  PairSet(const Dataset& dataset, std::vector<Index> indices, double range,
          std::string source_id);

  std::size_t size() const { return count_; }
  PreferencePair at(std::size_t k) const;

  double range() const { return range_; }
  const std::string& source_id() const { return source_id_; }
  const std::vector<Index>& indices() const { return indices_; }

 private:
  std::vector<Index> indices_;
  Vector labels_;  // full label vector of the source dataset
  double range_;
  std::string source_id_;
  std::size_t count_;
};

/// Ordered pairs (l, r) for l in left, r in right. Used for dev x train
/// pairs, oriented the way inference pairs are (candidate first, anchor
/// second).
class CrossPairSet {
 public:
  CrossPairSet(const Dataset& dataset, std::vector<Index> left, std::vector<Index> right,
               double range, std::string source_id);

  std::size_t size() const { return left_.size() * right_.size(); }
  PreferencePair at(std::size_t k) const;

  double range() const { return range_; }
  const std::string& source_id() const { return source_id_; }

 private:
  std::vector<Index> left_;
  std::vector<Index> right_;
  Vector labels_;
  double range_;
  std::string source_id_;
};

/// Self-cartesian pair set over the whole dataset.
PairSet generate_pairs(const Dataset& dataset, double range);

}  // namespace orars
