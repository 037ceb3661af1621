#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <numeric>

#include "orars/metrics.hpp"
#include "orars/rng.hpp"
#include "orars/types.hpp"

using namespace orars;

namespace {
Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("mae hand-evaluated cases") {
  CHECK(mae(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
  CHECK(mae(vec({2, 2}), vec({1, 3})) == doctest::Approx(1.0));
  CHECK(mae(vec({0}), vec({-5})) == doctest::Approx(5.0));
}

TEST_CASE("mse hand-evaluated cases") {
  CHECK(mse(vec({1, 2}), vec({1, 2})) == 0.0);
  CHECK(mse(vec({2, 2}), vec({1, 3})) == doctest::Approx(1.0));
  CHECK(mse(vec({3}), vec({0})) == doctest::Approx(9.0));
}

TEST_CASE("errors: length mismatch and non-finite input") {
  CHECK_THROWS_AS(mae(vec({1, 2}), vec({1})), ContractViolation);
  CHECK_THROWS_AS(mse(vec({1, 2}), vec({1})), ContractViolation);
  CHECK_THROWS_AS(mae(Vector(), Vector()), ContractViolation);
  CHECK_THROWS_AS(mae(vec({std::numeric_limits<double>::quiet_NaN()}), vec({1.0})), InvalidData);
  CHECK_THROWS_AS(mse(vec({std::numeric_limits<double>::infinity()}), vec({1.0})), InvalidData);
}

TEST_CASE("symmetry and permutation invariance") {
  Rng rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform_int(40));
    Vector a = rng.uniform_vector(n, -100.0, 100.0);
    Vector b = rng.uniform_vector(n, -100.0, 100.0);
    CHECK(mae(a, b) == doctest::Approx(mae(b, a)).epsilon(1e-15));
    CHECK(mse(a, b) == doctest::Approx(mse(b, a)).epsilon(1e-15));

    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    rng.shuffle(perm);
    Vector ap(n), bp(n);
    for (Index i = 0; i < n; ++i) {
      ap[i] = a[perm[static_cast<std::size_t>(i)]];
      bp[i] = b[perm[static_cast<std::size_t>(i)]];
    }
    CHECK(mae(ap, bp) == doctest::Approx(mae(a, b)).epsilon(1e-12));
    CHECK(mse(ap, bp) == doctest::Approx(mse(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("mse is nonnegative and zero only at equality") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform_int(20));
    Vector a = rng.uniform_vector(n, -5.0, 5.0);
    Vector b = a;
    CHECK(mse(a, b) == 0.0);
    const Index j = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    b[j] += 1e-3;
    CHECK(mse(a, b) > 0.0);
  }
}
