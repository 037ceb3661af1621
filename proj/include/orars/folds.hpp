#pragma once

#include <cstdint>

#include "orars/types.hpp"

namespace orars {

/// Shuffled k-fold split. Each row lands in exactly one test fold; within a
/// fold the remainder is split again, reserving ~10% (rounded to the nearest
/// index) as the development set. Deterministic for a fixed (row order, k,
/// seed) triple; all three index sets are emitted in ascending order.
FoldPlan split_folds(const Dataset& dataset, int k, std::uint64_t seed);

}  // namespace orars
