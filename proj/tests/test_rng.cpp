#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "orars/rng.hpp"

using namespace orars;

TEST_CASE("same seed reproduces the stream bitwise") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("child streams depend only on (seed, tag)") {
  Rng a(7);
  a.uniform();
  a.uniform();  // consuming the parent must not shift children
  Rng b(7);
  CHECK(a.child(3).next_u64() == b.child(3).next_u64());
  CHECK(a.child(3).next_u64() != a.child(4).next_u64());
}

TEST_CASE("uniform stays in [0, 1) and fills the range") {
  Rng rng(1);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("uniform_int is unbiased across a small modulus") {
  Rng rng(5);
  std::array<int, 5> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    counts[rng.uniform_int(5)]++;
  }
  for (int c : counts) {
    CHECK(std::abs(c - draws / 5) < 1000);  // ~7 sigma
  }
}

TEST_CASE("normal matches its first two moments") {
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(3);
  std::vector<int> v(257);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(v);
  std::set<int> seen(v.begin(), v.end());
  CHECK(seen.size() == v.size());
}

TEST_CASE("uniform_int rejects a zero bound") {
  Rng rng(1);
  CHECK_THROWS_AS(rng.uniform_int(0), ContractViolation);
}
