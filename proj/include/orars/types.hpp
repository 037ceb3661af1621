#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orars/errors.hpp"

namespace orars {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// One observation: a feature vector and its ground-truth score.
struct Sample {
  Vector features;
  double label = 0.0;
};

/// Immutable in-memory dataset. Features are stored row-major per sample;
/// all rows share one feature dimension and every value is finite.
/// Pair generation additionally needs at least two rows; that check lives
/// at the pairing boundary so single-row anchor sets stay usable.
class Dataset {
 public:
  Dataset(std::string name, Matrix features, Vector labels);

  static Dataset from_samples(std::string name, const std::vector<Sample>& samples);

  const std::string& name() const { return name_; }
  Index size() const { return features_.rows(); }
  Index feature_dim() const { return features_.cols(); }
  const Matrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }

  Eigen::Block<const Matrix, 1, Eigen::Dynamic> sample_features(Index i) const {
    return features_.row(i);
  }
  double label(Index i) const { return labels_[i]; }

  /// New dataset restricted to the given row indices (order preserved).
  Dataset subset(std::string name, const std::vector<Index>& indices) const;

 private:
  std::string name_;
  Matrix features_;
  Vector labels_;
};

/// Cross-validation plan: per fold, disjoint train/dev/test row-index sets.
struct FoldPlan {
  struct Fold {
    std::vector<Index> train;
    std::vector<Index> dev;
    std::vector<Index> test;
  };

  int k = 0;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;
};

/// Per-fold and aggregate errors for one trained method.
struct MetricsReport {
  std::string model_id;
  std::map<std::string, std::string> hyperparameters;

  std::vector<int> fold_indices;  // folds that completed
  std::vector<double> fold_mae;
  std::vector<double> fold_mse;
  std::vector<Index> fold_test_sizes;

  std::vector<int> skipped_folds;
  std::vector<std::string> skip_reasons;

  double mean_mae = 0.0;  // arithmetic mean over completed folds
  double mean_mse = 0.0;
  double pooled_mae = 0.0;  // over all test predictions, weighted by fold size
  double pooled_mse = 0.0;

  /// Recomputes the aggregate fields from the per-fold entries.
  void finalize();
};

/// Gather labels[i] for i in indices.
Vector gather(const Vector& values, const std::vector<Index>& indices);

/// Stack the selected rows of a matrix.
Matrix gather_rows(const Matrix& m, const std::vector<Index>& indices);

}  // namespace orars
