#include "orars/sorars.hpp"

#include <cmath>
#include <utility>

namespace orars {

int rule_g(const RegressorFn& f, const Eigen::Ref<const Vector>& x_t,
           const Eigen::Ref<const Vector>& x_a) {
  return f(x_t) > f(x_a) ? 1 : 0;
}

SorarsScorer::SorarsScorer(RegressorFn f, const Dataset& anchors)
    : f_(std::move(f)),
      anchor_outputs_(anchors.size()),
      anchor_scores_(anchors.labels()) {
  if (!f_) {
    throw ContractViolation("SorarsScorer: empty regressor function");
  }
  for (Index a = 0; a < anchors.size(); ++a) {
    anchor_outputs_[a] = f_(anchors.sample_features(a).transpose());
  }
  if (!anchor_outputs_.allFinite()) {
    throw InvalidData("SorarsScorer: regressor produced a non-finite anchor output");
  }
}

double SorarsScorer::predict(const Eigen::Ref<const Vector>& x_t) const {
  const double f_t = f_(x_t);
  if (!std::isfinite(f_t)) {
    throw InvalidData("SorarsScorer: regressor produced a non-finite output");
  }
  Vector p(anchor_outputs_.size());
  for (Index a = 0; a < anchor_outputs_.size(); ++a) {
    p[a] = f_t > anchor_outputs_[a] ? 1.0 : 0.0;
  }
  return score_with_preference(PosteriorVector(std::move(p)), anchor_scores_);
}

Vector SorarsScorer::predict_batch(const Eigen::Ref<const Matrix>& X) const {
  Vector out(X.rows());
  for (Index r = 0; r < X.rows(); ++r) {
    out[r] = predict(X.row(r).transpose());
  }
  return out;
}

double sorars_predict(const RegressorFn& f, const Eigen::Ref<const Vector>& x_t,
                      const Dataset& anchors) {
  return SorarsScorer(f, anchors).predict(x_t);
}

RegressorFn regressor_fn(const MlpModel& model) {
  if (model.config.output != OutputHead::regression) {
    throw ContractViolation("regressor_fn: model must have a regression head");
  }
  return [model](const Eigen::Ref<const Vector>& x) {
    return forward(model, x, RunMode::inference);
  };
}

}  // namespace orars
