#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "orars/rng.hpp"
#include "orars/scoring.hpp"

using namespace orars;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

/// Independent oracle: count anchors strictly below the test score by direct
/// comparison, then pick that position in the ascending score list.
double brute_force_rank_score(const Vector& anchor_scores, double test_score) {
  Index below = 0;
  for (Index a = 0; a < anchor_scores.size(); ++a) {
    if (anchor_scores[a] < test_score) ++below;
  }
  std::vector<double> sorted(anchor_scores.begin(), anchor_scores.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[static_cast<std::size_t>(
      std::min(below, static_cast<Index>(sorted.size()) - 1))];
}

MlpModel constant_half_classifier(Index feature_dim) {
  MlpConfig c;
  c.input_dim = 2 * feature_dim;
  c.hidden_units = 4;
  c.dropout_rate = 0.0;
  c.learning_rate = 1e-3;
  c.output = OutputHead::probability;
  Rng rng(0);
  MlpModel model = MlpModel::init(c, rng);
  for (auto& w : model.weights) w.setZero();
  for (auto& b : model.biases) b.setZero();  // sigmoid(0) = 0.5
  return model;
}

}  // namespace

TEST_CASE("anchor scores sort ascending and validate") {
  const AnchorScores scores(vec({3, 1, 2}));
  CHECK(scores.sorted() == vec({1, 2, 3}));
  CHECK_THROWS_AS(AnchorScores(Vector{}), InvalidConfig);
  CHECK_THROWS_AS(AnchorScores(vec({std::numeric_limits<double>::quiet_NaN()})), InvalidData);
}

TEST_CASE("posterior vector validates its range") {
  CHECK_NOTHROW(PosteriorVector(vec({0.0, 1.0, 0.5})));
  CHECK_THROWS_AS(PosteriorVector(vec({-0.01})), InvalidData);
  CHECK_THROWS_AS(PosteriorVector(vec({1.01})), InvalidData);
  CHECK_THROWS_AS(PosteriorVector(Vector{}), ContractViolation);
}

TEST_CASE("score_with_preference hand cases") {
  const AnchorScores anchors(vec({1.0, 2.0, 3.0, 4.0}));
  CHECK(score_with_preference(PosteriorVector(vec({0, 0, 0, 0})), anchors) == 1.0);
  CHECK(score_with_preference(PosteriorVector(vec({0.9, 0.9, 0.9, 0.9})), anchors) == 4.0);
  CHECK(score_with_preference(PosteriorVector(vec({1, 1, 1, 1})), anchors) == 4.0);
  CHECK(score_with_preference(PosteriorVector(vec({0.6, 0.6, 0.3, 0.0})), anchors) == 2.0);
}

TEST_CASE("max_with_last rule reproduces the uncorrected arithmetic") {
  const AnchorScores anchors(vec({1.0, 2.0, 3.0, 4.0}));
  // max(3, floor(sum)) pins every in-range sum at the last element...
  CHECK(score_with_preference(PosteriorVector(vec({0, 0, 0, 0})), anchors,
                              IndexRule::max_with_last) == 4.0);
  CHECK(score_with_preference(PosteriorVector(vec({0.9, 0.9, 0.9, 0.9})), anchors,
                              IndexRule::max_with_last) == 4.0);
  // ...and runs off the end when the sum reaches the anchor count.
  CHECK_THROWS_AS(score_with_preference(PosteriorVector(vec({1, 1, 1, 1})), anchors,
                                        IndexRule::max_with_last),
                  ContractViolation);
}

TEST_CASE("size mismatch and empty anchors are rejected") {
  const AnchorScores anchors(vec({1.0, 2.0}));
  CHECK_THROWS_AS(score_with_preference(PosteriorVector(vec({0.5})), anchors),
                  ContractViolation);
}

TEST_CASE("exact 0/1 posterior vectors match the brute-force rank oracle") {
  Rng rng(42);
  for (int instance = 0; instance < 1000; ++instance) {
    const Index a = 1 + static_cast<Index>(rng.uniform_int(50));
    Vector scores(a);
    for (Index i = 0; i < a; ++i) {
      scores[i] = rng.uniform(-100.0, 100.0);
    }
    const double test_score = rng.uniform(-120.0, 120.0);
    Vector p(a);
    for (Index i = 0; i < a; ++i) {
      p[i] = test_score > scores[i] ? 1.0 : 0.0;
    }
    const double predicted = score_with_preference(PosteriorVector(p), AnchorScores(scores));
    CHECK(predicted == brute_force_rank_score(scores, test_score));
  }
}

TEST_CASE("monotonicity: raising posteriors never lowers the score") {
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const Index a = 1 + static_cast<Index>(rng.uniform_int(30));
    Vector scores = rng.uniform_vector(a, -10.0, 10.0);
    Vector p(a), q(a);
    for (Index i = 0; i < a; ++i) {
      p[i] = rng.uniform();
      q[i] = std::min(1.0, p[i] + rng.uniform() * (1.0 - p[i]));
    }
    const AnchorScores anchors(scores);
    CHECK(score_with_preference(PosteriorVector(q), anchors) >=
          score_with_preference(PosteriorVector(p), anchors));
  }
}

TEST_CASE("output always lies inside the anchor score range") {
  Rng rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    const Index a = 1 + static_cast<Index>(rng.uniform_int(20));
    Vector scores = rng.uniform_vector(a, -5.0, 5.0);
    Vector p(a);
    for (Index i = 0; i < a; ++i) p[i] = rng.uniform();
    const double out = score_with_preference(PosteriorVector(p), AnchorScores(scores));
    CHECK(out >= scores.minCoeff());
    CHECK(out <= scores.maxCoeff());
  }
}

TEST_CASE("permuting anchors together with posteriors changes nothing") {
  Rng rng(9);
  const Index a = 17;
  Vector scores = rng.uniform_vector(a, 0.0, 50.0);
  Vector p(a);
  for (Index i = 0; i < a; ++i) p[i] = rng.uniform();
  const double base = score_with_preference(PosteriorVector(p), AnchorScores(scores));

  std::vector<Index> perm(static_cast<std::size_t>(a));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (int trial = 0; trial < 20; ++trial) {
    rng.shuffle(perm);
    Vector ps(a), ss(a);
    for (Index i = 0; i < a; ++i) {
      ps[i] = p[perm[static_cast<std::size_t>(i)]];
      ss[i] = scores[perm[static_cast<std::size_t>(i)]];
    }
    CHECK(score_with_preference(PosteriorVector(ps), AnchorScores(ss)) == base);
  }
}

TEST_CASE("floor stays stable across twenty thousand anchors") {
  const Index a = 20001;
  Vector scores = Vector::LinSpaced(a, 0.0, 200.0);
  Vector p(a);
  for (Index i = 0; i < a; ++i) {
    p[i] = (i % 2 == 0) ? 1.0 : 0.0;  // exact sum: 10001
  }
  const double out = score_with_preference(PosteriorVector(p), AnchorScores(scores));
  CHECK(out == scores[10001]);
}

TEST_CASE("posteriors: constant-0.5 classifier and ordering") {
  const Index dim = 3;
  const MlpModel clf = constant_half_classifier(dim);

  Matrix features(2, dim);
  features << 1, 2, 3, 4, 5, 6;
  const Dataset anchors("anchors", features, vec({1.0, 2.0}));

  const PosteriorVector p = posteriors(clf, Vector::Zero(dim), anchors);
  CHECK(p.size() == 2);
  CHECK(p.values()[0] == 0.5);
  CHECK(p.values()[1] == 0.5);

  // repeated calls are identical (inference is pure)
  const PosteriorVector q = posteriors(clf, Vector::Zero(dim), anchors);
  CHECK(p.values() == q.values());
}

TEST_CASE("posteriors: single anchor gives a length-1 vector") {
  const Index dim = 2;
  const MlpModel clf = constant_half_classifier(dim);
  Matrix features(1, dim);
  features << 3, 4;
  Vector label(1);
  label << 7.0;
  const Dataset anchors("one", features, label);
  CHECK(posteriors(clf, Vector::Zero(dim), anchors).size() == 1);
}

TEST_CASE("posteriors rejects mismatched dimensions") {
  const MlpModel clf = constant_half_classifier(3);
  Matrix features(2, 3);
  features.setZero();
  const Dataset anchors("a", features, vec({0.0, 1.0}));
  CHECK_THROWS_AS(posteriors(clf, Vector::Zero(4), anchors), ContractViolation);

  const MlpModel wrong_width = constant_half_classifier(2);
  CHECK_THROWS_AS(posteriors(wrong_width, Vector::Zero(3), anchors), ContractViolation);
}

TEST_CASE("score_per_rank hand cases and validation") {
  CHECK(score_per_rank({{0.0, 0.0}, {0.0, 0.0}}, 2) == 0.0);
  CHECK(score_per_rank({{1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}}, 2) == doctest::Approx(5.0));
  CHECK(score_per_rank({{0.5}, {0.5}}, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(score_per_rank({{0.5}, {0.5, 0.5}}, 1), InvalidConfig);
  CHECK_THROWS_AS(score_per_rank({}, 1), InvalidConfig);
  CHECK_THROWS_AS(score_per_rank({{0.5}}, 0), InvalidConfig);
  CHECK_THROWS_AS(score_per_rank({{1.5}}, 1), InvalidData);
}

TEST_CASE("score_per_rank stays within [0, K]") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int ranks = 1 + static_cast<int>(rng.uniform_int(6));
    const int per_rank = 1 + static_cast<int>(rng.uniform_int(4));
    std::vector<std::vector<double>> groups(static_cast<std::size_t>(ranks));
    for (auto& g : groups) {
      for (int i = 0; i < per_rank; ++i) {
        g.push_back(rng.uniform());
      }
    }
    const double s = score_per_rank(groups, per_rank);
    CHECK(s >= 0.0);
    CHECK(s <= static_cast<double>(ranks));
  }
}
