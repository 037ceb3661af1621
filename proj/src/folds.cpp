#include "orars/folds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orars/rng.hpp"

namespace orars {

FoldPlan split_folds(const Dataset& dataset, int k, std::uint64_t seed) {
  const Index n = dataset.size();
  if (k < 1) {
    throw InvalidConfig("split_folds: k must be positive, got " + std::to_string(k));
  }
  if (static_cast<Index>(k) > n) {
    throw InvalidConfig("split_folds: k=" + std::to_string(k) + " exceeds dataset size " +
                        std::to_string(n));
  }

  Rng rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(order);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(static_cast<std::size_t>(k));

  for (int f = 0; f < k; ++f) {
    const std::size_t lo = static_cast<std::size_t>(static_cast<long long>(f) * n / k);
    const std::size_t hi = static_cast<std::size_t>(static_cast<long long>(f + 1) * n / k);
    auto& fold = plan.folds[static_cast<std::size_t>(f)];

    fold.test.assign(order.begin() + static_cast<std::ptrdiff_t>(lo),
                     order.begin() + static_cast<std::ptrdiff_t>(hi));

    std::vector<Index> trainval;
    trainval.reserve(order.size() - (hi - lo));
    trainval.insert(trainval.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(lo));
    trainval.insert(trainval.end(), order.begin() + static_cast<std::ptrdiff_t>(hi), order.end());

    // Fold-local shuffle decides which trainval rows become the dev set.
    Rng fold_rng = rng.child(static_cast<std::uint64_t>(f));
    fold_rng.shuffle(trainval);
    const std::size_t dev_n = static_cast<std::size_t>(
        std::llround(0.1 * static_cast<double>(trainval.size())));

    fold.dev.assign(trainval.begin(), trainval.begin() + static_cast<std::ptrdiff_t>(dev_n));
    fold.train.assign(trainval.begin() + static_cast<std::ptrdiff_t>(dev_n), trainval.end());

    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.dev.begin(), fold.dev.end());
    std::sort(fold.test.begin(), fold.test.end());
  }
  return plan;
}

}  // namespace orars
