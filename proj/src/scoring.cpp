#include "orars/scoring.hpp"

#include <algorithm>
#include <cmath>

namespace orars {

AnchorScores::AnchorScores(Vector scores) : sorted_(std::move(scores)) {
  if (sorted_.size() < 1) {
    throw InvalidConfig("AnchorScores: empty anchor set");
  }
  if (!sorted_.allFinite()) {
    throw InvalidData("AnchorScores: non-finite score");
  }
  std::stable_sort(sorted_.begin(), sorted_.end());
}

PosteriorVector::PosteriorVector(Vector p) : p_(std::move(p)) {
  if (p_.size() < 1) {
    throw ContractViolation("PosteriorVector: empty");
  }
  for (Index i = 0; i < p_.size(); ++i) {
    if (!(p_[i] >= 0.0 && p_[i] <= 1.0)) {
      throw InvalidData("PosteriorVector: entry " + std::to_string(i) + " outside [0, 1]");
    }
  }
}

PosteriorVector posteriors(const MlpModel& classifier, const Eigen::Ref<const Vector>& x_t,
                           const Dataset& anchors) {
  if (classifier.config.output != OutputHead::probability) {
    throw ContractViolation("posteriors: classifier must have a probability head");
  }
  const Index n = anchors.feature_dim();
  if (x_t.size() != n) {
    throw ContractViolation("posteriors: test feature dim mismatch");
  }
  if (classifier.config.input_dim != 2 * n) {
    throw ContractViolation("posteriors: classifier input_dim must be 2 * feature_dim");
  }
  Matrix X(anchors.size(), 2 * n);
  X.leftCols(n) = x_t.transpose().replicate(anchors.size(), 1);
  X.rightCols(n) = anchors.features();
  return PosteriorVector(forward_batch(classifier, X, RunMode::inference));
}

double score_with_preference(const PosteriorVector& p, const AnchorScores& anchors,
                             IndexRule rule) {
  if (p.size() != anchors.size()) {
    throw ContractViolation("score_with_preference: posterior count " + std::to_string(p.size()) +
                            " != anchor count " + std::to_string(anchors.size()));
  }

  // Kahan summation.
  double sum = 0.0, comp = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    const double y = p.values()[i] - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }

  const auto last = static_cast<long long>(anchors.size() - 1);
  long long k = static_cast<long long>(std::floor(sum));
  if (rule == IndexRule::max_with_last) {
    k = std::max(last, k);
    if (k > last) {
      throw ContractViolation("score_with_preference: max_with_last rule indexed past the end");
    }
  } else {
    k = std::clamp(k, 0LL, last);
  }
  return anchors.at(static_cast<Index>(k));
}

double score_per_rank(const std::vector<std::vector<double>>& posteriors_by_rank,
                      int anchors_per_rank) {
  if (anchors_per_rank < 1) {
    throw InvalidConfig("score_per_rank: anchors_per_rank must be positive");
  }
  if (posteriors_by_rank.empty()) {
    throw InvalidConfig("score_per_rank: no rank groups");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < posteriors_by_rank.size(); ++k) {
    const auto& group = posteriors_by_rank[k];
    if (group.size() != static_cast<std::size_t>(anchors_per_rank)) {
      throw InvalidConfig("score_per_rank: rank " + std::to_string(k + 1) + " has " +
                          std::to_string(group.size()) + " anchors, expected " +
                          std::to_string(anchors_per_rank));
    }
    for (double p : group) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidData("score_per_rank: posterior outside [0, 1]");
      }
      sum += p;
    }
  }
  return sum / static_cast<double>(anchors_per_rank);
}

}  // namespace orars
