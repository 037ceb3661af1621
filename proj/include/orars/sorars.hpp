#pragma once

#include <functional>

#include "orars/scoring.hpp"
#include "orars/types.hpp"

namespace orars {

/// Any trained point regressor usable as a rule-based preference source.
using RegressorFn = std::function<double(const Eigen::Ref<const Vector>&)>;

/// Rule-based binary preference: 1 if the regressor scores x_t above x_a,
/// 0 otherwise (ties included).
int rule_g(const RegressorFn& f, const Eigen::Ref<const Vector>& x_t,
           const Eigen::Ref<const Vector>& x_a);

/// Rescoring via rule-based preferences against a fixed anchor set. The
/// regressor runs once per anchor at construction and once per test sample;
/// only the induced order matters, so any strictly increasing transform of
/// the regressor leaves predictions unchanged.
class SorarsScorer {
 public:
  SorarsScorer(RegressorFn f, const Dataset& anchors);

  double predict(const Eigen::Ref<const Vector>& x_t) const;
  Vector predict_batch(const Eigen::Ref<const Matrix>& X) const;

  const AnchorScores& anchor_scores() const { return anchor_scores_; }

 private:
  RegressorFn f_;
  Vector anchor_outputs_;      // regressor outputs, anchor order
  AnchorScores anchor_scores_;  // ground-truth anchor labels, ascending
};

/// One-shot convenience wrapper around SorarsScorer.
double sorars_predict(const RegressorFn& f, const Eigen::Ref<const Vector>& x_t,
                      const Dataset& anchors);

/// Adapts a trained regression model into a RegressorFn (inference mode).
RegressorFn regressor_fn(const MlpModel& model);

}  // namespace orars
