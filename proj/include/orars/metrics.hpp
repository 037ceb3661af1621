#pragma once

#include <string>

#include <Eigen/Dense>

#include "orars/errors.hpp"

namespace orars {

namespace detail {
inline void check_metric_inputs(Eigen::Index na, Eigen::Index nb, bool finite, const char* op) {
  if (na != nb) {
    throw ContractViolation(std::string(op) + ": length mismatch (" + std::to_string(na) +
                            " vs " + std::to_string(nb) + ")");
  }
  if (na == 0) {
    throw ContractViolation(std::string(op) + ": empty input");
  }
  if (!finite) {
    throw InvalidData(std::string(op) + ": non-finite input value");
  }
}
}  // namespace detail

/// Mean absolute error between two equally-sized vectors.
template <class DerivedA, class DerivedB>
double mae(const Eigen::MatrixBase<DerivedA>& predictions,
           const Eigen::MatrixBase<DerivedB>& targets) {
  detail::check_metric_inputs(predictions.size(), targets.size(),
                              predictions.allFinite() && targets.allFinite(), "mae");
  return (predictions.derived().template cast<double>().array() -
          targets.derived().template cast<double>().array())
      .abs()
      .mean();
}

/// Mean squared error between two equally-sized vectors.
template <class DerivedA, class DerivedB>
double mse(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  detail::check_metric_inputs(a.size(), b.size(), a.allFinite() && b.allFinite(), "mse");
  return (a.derived().template cast<double>().array() -
          b.derived().template cast<double>().array())
      .square()
      .mean();
}

}  // namespace orars
