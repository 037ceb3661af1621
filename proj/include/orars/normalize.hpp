#pragma once

#include <utility>
#include <vector>

#include "orars/types.hpp"

namespace orars {

/// Per-column z-score statistics computed on training rows only.
/// A standard deviation of 0 marks a zero-variance column; transformed
/// values in such columns map to 0.
struct NormStats {
  Vector mean;
  Vector stddev;  // population standard deviation; 0 for zero-variance columns
};

/// Population mean/stddev per feature column over the given training rows.
NormStats compute_norm_stats(const Dataset& dataset, const std::vector<Index>& train_indices);

/// z-score transform of every row with the supplied (training) statistics.
Matrix apply_normalization(const Matrix& features, const NormStats& stats);

/// Same transform applied to a whole dataset (labels untouched).
Dataset apply_normalization(const Dataset& dataset, const NormStats& stats);

/// Convenience: stats from the training rows, applied to the full dataset.
std::pair<Dataset, NormStats> normalize_features(const Dataset& dataset,
                                                 const std::vector<Index>& train_indices);

}  // namespace orars
