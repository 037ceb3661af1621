#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "orars/folds.hpp"
#include "orars/io.hpp"

using namespace orars;

namespace {

Dataset make_dataset(Index n) {
  return synth_dataset(SynthKind::linear, n, 2, 0.0, 77).dataset;
}

bool disjoint(const std::vector<Index>& a, const std::vector<Index>& b) {
  std::set<Index> sa(a.begin(), a.end());
  for (Index x : b) {
    if (sa.count(x)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("size 10, k=5: five test folds of size 2") {
  const FoldPlan plan = split_folds(make_dataset(10), 5, 123);
  CHECK(plan.folds.size() == 5);
  for (const auto& fold : plan.folds) {
    CHECK(fold.test.size() == 2);
  }
}

TEST_CASE("same seed twice gives identical plans") {
  const Dataset ds = make_dataset(37);
  const FoldPlan a = split_folds(ds, 5, 99);
  const FoldPlan b = split_folds(ds, 5, 99);
  REQUIRE(a.folds.size() == b.folds.size());
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    CHECK(a.folds[f].train == b.folds[f].train);
    CHECK(a.folds[f].dev == b.folds[f].dev);
    CHECK(a.folds[f].test == b.folds[f].test);
  }
  const FoldPlan c = split_folds(ds, 5, 100);
  bool any_difference = false;
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    any_difference = any_difference || a.folds[f].test != c.folds[f].test;
  }
  CHECK(any_difference);
}

TEST_CASE("size 43, k=5: test sizes in {8, 9}, tests cover all rows") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const FoldPlan plan = split_folds(make_dataset(43), 5, seed);
    std::set<Index> all_tests;
    for (const auto& fold : plan.folds) {
      CHECK((fold.test.size() == 8 || fold.test.size() == 9));
      all_tests.insert(fold.test.begin(), fold.test.end());
    }
    CHECK(all_tests.size() == 43);
  }
}

TEST_CASE("within each fold the three sets are disjoint and cover everything") {
  const FoldPlan plan = split_folds(make_dataset(101), 4, 5);
  for (const auto& fold : plan.folds) {
    CHECK(disjoint(fold.train, fold.dev));
    CHECK(disjoint(fold.train, fold.test));
    CHECK(disjoint(fold.dev, fold.test));
    CHECK(fold.train.size() + fold.dev.size() + fold.test.size() == 101);
  }
}

TEST_CASE("dev holds ~10% of the trainval rows") {
  const FoldPlan plan = split_folds(make_dataset(100), 5, 8);
  for (const auto& fold : plan.folds) {
    const auto trainval = fold.train.size() + fold.dev.size();
    CHECK(trainval == 80);
    CHECK(fold.dev.size() == 8);
  }
}

TEST_CASE("invalid k") {
  const Dataset ds = make_dataset(10);
  CHECK_THROWS_AS(split_folds(ds, 0, 1), InvalidConfig);
  CHECK_THROWS_AS(split_folds(ds, 11, 1), InvalidConfig);
}
