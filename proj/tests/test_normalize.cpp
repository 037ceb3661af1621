#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orars/normalize.hpp"

using namespace orars;

namespace {

Dataset three_column_dataset() {
  // col0: constant; col1: {0, 2} on training rows; col2: arbitrary
  Matrix f(4, 3);
  f << 5.0, 0.0, 10.0,  //
      5.0, 2.0, 20.0,   //
      5.0, 7.0, 30.0,   //
      5.0, -3.0, 40.0;
  Vector y(4);
  y << 1, 2, 3, 4;
  return Dataset("test", f, y);
}

}  // namespace

TEST_CASE("constant column maps to zero everywhere") {
  const Dataset ds = three_column_dataset();
  const auto [normalized, stats] = normalize_features(ds, {0, 1});
  CHECK(stats.stddev[0] == 0.0);
  for (Index r = 0; r < normalized.size(); ++r) {
    CHECK(normalized.features()(r, 0) == 0.0);
  }
}

TEST_CASE("training column {0, 2} maps to {-1, +1} under population stddev") {
  const Dataset ds = three_column_dataset();
  const auto [normalized, stats] = normalize_features(ds, {0, 1});
  CHECK(stats.mean[1] == doctest::Approx(1.0));
  CHECK(stats.stddev[1] == doctest::Approx(1.0));  // population: sqrt(((0-1)^2+(2-1)^2)/2)
  CHECK(normalized.features()(0, 1) == doctest::Approx(-1.0));
  CHECK(normalized.features()(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("held-out rows are transformed with training statistics only") {
  const Dataset ds = three_column_dataset();
  const auto [normalized, stats] = normalize_features(ds, {0, 1});
  // Row 2 was not in training; its value must use the training mean/std.
  CHECK(normalized.features()(2, 1) == doctest::Approx((7.0 - 1.0) / 1.0));
  CHECK(normalized.features()(3, 1) == doctest::Approx((-3.0 - 1.0) / 1.0));
}

TEST_CASE("training rows end up with ~0 mean and ~1 stddev per column") {
  Matrix f(6, 2);
  f << 1.0, -3.0, 2.5, 8.0, -4.0, 0.5, 0.0, 2.0, 9.0, -7.0, 3.0, 1.0;
  Vector y = Vector::LinSpaced(6, 0, 5);
  const Dataset ds("t", f, y);
  const std::vector<Index> train = {0, 1, 2, 3};
  const auto [normalized, stats] = normalize_features(ds, train);
  for (Index c = 0; c < 2; ++c) {
    double mean = 0.0, var = 0.0;
    for (Index r : train) {
      mean += normalized.features()(r, c);
    }
    mean /= static_cast<double>(train.size());
    for (Index r : train) {
      const double d = normalized.features()(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(train.size());
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("labels are untouched") {
  const Dataset ds = three_column_dataset();
  const auto [normalized, stats] = normalize_features(ds, {0, 1, 2, 3});
  CHECK(normalized.labels() == ds.labels());
}

TEST_CASE("empty training index set is rejected") {
  const Dataset ds = three_column_dataset();
  CHECK_THROWS_AS(compute_norm_stats(ds, {}), ContractViolation);
}
