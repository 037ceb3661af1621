#pragma once

#include <vector>

#include "orars/mlp.hpp"
#include "orars/types.hpp"

namespace orars {

/// Ascending score sequence of the anchor set.
class AnchorScores {
 public:
  /// Sorts the given scores ascending. Needs at least one finite score.
  explicit AnchorScores(Vector scores);

  const Vector& sorted() const { return sorted_; }
  Index size() const { return sorted_.size(); }
  double at(Index k) const { return sorted_[k]; }

 private:
  Vector sorted_;
};

/// Per-anchor preference confidences, each in [0, 1].
class PosteriorVector {
 public:
  explicit PosteriorVector(Vector p);

  const Vector& values() const { return p_; }
  Index size() const { return p_.size(); }

 private:
  Vector p_;
};

/// How the summed posterior maps into the sorted score sequence.
enum class IndexRule {
  clamp,          // clamp(floor(sum), 0, size - 1); the default
  max_with_last,  // max(size - 1, floor(sum)); kept for auditability, can
                  // only select the last element or run past the end
};

/// Preference confidences of x_t against every anchor, in anchor order.
/// Runs the classifier in inference mode on concat(x_t, x_a) rows.
PosteriorVector posteriors(const MlpModel& classifier, const Eigen::Ref<const Vector>& x_t,
                           const Dataset& anchors);

/// Maps the posterior vector to the anchor score at the summed preference
/// count. The sum is accumulated in compensated arithmetic so the floor is
/// stable for tens of thousands of anchors.
double score_with_preference(const PosteriorVector& p, const AnchorScores& anchors,
                             IndexRule rule = IndexRule::clamp);

/// Rank-bucketed scorer for datasets with discrete ranks 1..K and exactly
/// `anchors_per_rank` anchors in each rank: sum of all posteriors divided by
/// anchors_per_rank, a continuous value in [0, K].
double score_per_rank(const std::vector<std::vector<double>>& posteriors_by_rank,
                      int anchors_per_rank);

}  // namespace orars
