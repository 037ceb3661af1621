#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "orars/metrics.hpp"
#include "orars/mlp.hpp"

using namespace orars;

namespace {

MlpConfig small_config(Index input_dim, OutputHead head, double dropout = 0.0) {
  MlpConfig c;
  c.input_dim = input_dim;
  c.hidden_units = 8;
  c.dropout_rate = dropout;
  c.learning_rate = 1e-3;
  c.output = head;
  return c;
}

/// Loss of the model on a fixed batch with frozen dropout masks; the
/// independent path the analytic gradients are checked against.
double batch_loss(const MlpModel& model, const Matrix& X, const Vector& targets,
                  const Vector& weights, LossKind kind, const DropoutMasks& masks) {
  const Vector out = forward_batch(model, X, RunMode::train, nullptr, nullptr, &masks);
  if (kind == LossKind::mse) {
    return mse(out, targets);
  }
  return ce_loss(targets, out, weights);
}

/// Smallest |pre-activation| across all blocks; batches too close to a ReLU
/// kink are rerolled so central differences stay on one smooth piece.
double min_preactivation_margin(const MlpModel& model, const Matrix& X,
                                const DropoutMasks& masks) {
  Matrix a = X;
  double margin = std::numeric_limits<double>::infinity();
  for (int l = 0; l < MlpConfig::n_blocks; ++l) {
    Matrix z = (a * model.weights[static_cast<std::size_t>(l)]).rowwise() +
               model.biases[static_cast<std::size_t>(l)].transpose();
    if (masks.active) {
      z.array() *= masks.mask[static_cast<std::size_t>(l)].array();
      // dropped units sit exactly at 0; they are flat on both sides
      for (Index c = 0; c < z.cols(); ++c) {
        for (Index r = 0; r < z.rows(); ++r) {
          if (masks.mask[static_cast<std::size_t>(l)](r, c) != 0.0) {
            margin = std::min(margin, std::abs(z(r, c)));
          }
        }
      }
    } else {
      margin = std::min(margin, z.cwiseAbs().minCoeff());
    }
    a = z.cwiseMax(0.0);
  }
  return margin;
}

struct GradCheckSetup {
  MlpModel model;
  Matrix X;
  Vector targets;
  Vector weights;
  DropoutMasks masks;
};

GradCheckSetup make_setup(std::uint64_t seed, OutputHead head, double dropout) {
  const Index input_dim = 4;
  const Index batch = 5;
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(seed + 1000 * attempt);
    GradCheckSetup s;
    s.model = MlpModel::init(small_config(input_dim, head, dropout), rng);
    s.X = Matrix(batch, input_dim);
    for (Index r = 0; r < batch; ++r) {
      for (Index c = 0; c < input_dim; ++c) {
        s.X(r, c) = rng.uniform(-2.0, 2.0);
      }
    }
    s.targets = Vector(batch);
    for (Index r = 0; r < batch; ++r) {
      s.targets[r] = head == OutputHead::probability ? static_cast<double>(rng.uniform_int(2))
                                                     : rng.uniform(-3.0, 3.0);
    }
    s.weights = rng.uniform_vector(batch, 0.1, 1.0);
    s.masks = sample_dropout_masks(s.model.config, batch, rng);
    if (min_preactivation_margin(s.model, s.X, s.masks) > 1e-3) {
      return s;
    }
    REQUIRE(attempt < 50);
  }
}

void check_gradients(std::uint64_t seed, LossKind kind, double dropout) {
  const OutputHead head =
      kind == LossKind::weighted_ce ? OutputHead::probability : OutputHead::regression;
  GradCheckSetup s = make_setup(seed, head, dropout);

  ForwardCache cache;
  forward_batch(s.model, s.X, RunMode::train, nullptr, &cache, &s.masks);
  const Gradients grads = backward(s.model, cache, s.targets, s.weights, kind);

  const double h = 1e-5;
  auto check_entry = [&](double analytic, double* param) {
    const double saved = *param;
    *param = saved + h;
    const double up = batch_loss(s.model, s.X, s.targets, s.weights, kind, s.masks);
    *param = saved - h;
    const double down = batch_loss(s.model, s.X, s.targets, s.weights, kind, s.masks);
    *param = saved;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-2});
    CHECK(std::abs(analytic - fd) / denom < 1e-4);
  };

  for (std::size_t l = 0; l < s.model.weights.size(); ++l) {
    Matrix& w = s.model.weights[l];
    for (Index c = 0; c < w.cols(); ++c) {
      for (Index r = 0; r < w.rows(); ++r) {
        check_entry(grads.weights[l](r, c), &w(r, c));
      }
    }
    Vector& b = s.model.biases[l];
    for (Index i = 0; i < b.size(); ++i) {
      check_entry(grads.biases[l][i], &b[i]);
    }
  }
}

}  // namespace

TEST_CASE("zero parameters with regression head output 0 for any input") {
  Rng rng(1);
  MlpModel model = MlpModel::init(small_config(3, OutputHead::regression), rng);
  for (auto& w : model.weights) w.setZero();
  for (auto& b : model.biases) b.setZero();
  for (int t = 0; t < 20; ++t) {
    const Vector x = rng.uniform_vector(3, -10.0, 10.0);
    CHECK(forward(model, x, RunMode::inference) == 0.0);
  }
}

TEST_CASE("inference mode is deterministic and ignores dropout") {
  Rng rng(2);
  MlpModel model = MlpModel::init(small_config(3, OutputHead::regression, 0.5), rng);
  const Vector x = rng.uniform_vector(3, -1.0, 1.0);
  const double first = forward(model, x, RunMode::inference);
  const double second = forward(model, x, RunMode::inference);
  CHECK(first == second);
}

TEST_CASE("train mode with dropout varies across calls") {
  Rng rng(3);
  MlpModel model = MlpModel::init(small_config(3, OutputHead::regression, 0.5), rng);
  Matrix X(1, 3);
  X << 0.5, -0.2, 1.0;
  bool any_difference = false;
  const double base = forward_batch(model, X, RunMode::train, &rng)[0];
  for (int t = 0; t < 10; ++t) {
    any_difference =
        any_difference || forward_batch(model, X, RunMode::train, &rng)[0] != base;
  }
  CHECK(any_difference);
}

TEST_CASE("probability head stays strictly inside (0, 1) over a sweep") {
  Rng rng(4);
  MlpModel model = MlpModel::init(small_config(6, OutputHead::probability), rng);
  for (int t = 0; t < 10000; ++t) {
    const Vector x = rng.uniform_vector(6, -3.0, 3.0);
    const double p = forward(model, x, RunMode::inference);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  Rng rng(5);
  MlpModel model = MlpModel::init(small_config(3, OutputHead::regression), rng);
  CHECK_THROWS_AS(forward(model, Vector::Zero(4), RunMode::inference), ContractViolation);
}

TEST_CASE("ce_loss hand cases") {
  Vector one_target(1), one_prob(1), one_weight(1);
  one_target << 1;
  one_prob << 1.0 - 1e-9;  // clamps to 1 - 1e-7
  one_weight << 1;
  CHECK(ce_loss(one_target, one_prob, one_weight) == doctest::Approx(0.0).epsilon(1e-6));

  Vector t(2), p(2), w(2);
  t << 1, 0;
  p << 0.5, 0.5;
  w << 1, 1;
  CHECK(ce_loss(t, p, w) == doctest::Approx(std::log(2.0)));

  w << 0, 1;  // zero-weight example contributes nothing
  p << 0.123, 0.5;
  CHECK(ce_loss(t, p, w) == doctest::Approx(std::log(2.0) / 2.0));
}

TEST_CASE("ce_loss with unit weights equals the unweighted mean form") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform_int(30));
    Vector t(n), p(n);
    for (Index i = 0; i < n; ++i) {
      t[i] = static_cast<double>(rng.uniform_int(2));
      p[i] = rng.uniform(0.01, 0.99);
    }
    double manual = 0.0;
    for (Index i = 0; i < n; ++i) {
      manual += t[i] * std::log(p[i]) + (1.0 - t[i]) * std::log(1.0 - p[i]);
    }
    manual = -manual / static_cast<double>(n);
    CHECK(std::abs(ce_loss(t, p, Vector::Ones(n)) - manual) <= 1e-12 * std::max(1.0, manual));
  }
}

TEST_CASE("ce_loss is finite at saturated probabilities and rejects bad input") {
  Vector t(2), p(2), w(2);
  t << 1, 0;
  p << 0.0, 1.0;  // exactly at the boundary: clamped, still finite
  w << 1, 1;
  CHECK(std::isfinite(ce_loss(t, p, w)));
  p << -0.1, 0.5;
  CHECK_THROWS_AS(ce_loss(t, p, w), InvalidData);
  p << 0.5, 1.1;
  CHECK_THROWS_AS(ce_loss(t, p, w), InvalidData);
}

TEST_CASE("analytic gradients match central finite differences (mse)") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    check_gradients(seed, LossKind::mse, 0.0);
  }
}

TEST_CASE("analytic gradients match central finite differences (weighted ce)") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    check_gradients(seed, LossKind::weighted_ce, 0.0);
  }
}

TEST_CASE("gradients stay correct with dropout masks frozen") {
  check_gradients(55, LossKind::mse, 0.3);
  check_gradients(56, LossKind::weighted_ce, 0.3);
}

TEST_CASE("a dead ReLU unit accumulates zero gradient") {
  Rng rng(7);
  MlpModel model = MlpModel::init(small_config(4, OutputHead::regression), rng);
  const Index dead = 2;
  model.weights[0].col(dead).setZero();
  model.biases[0][dead] = -1.0;  // pre-activation fixed at -1: always off

  Matrix X(5, 4);
  for (Index r = 0; r < 5; ++r) {
    for (Index c = 0; c < 4; ++c) {
      X(r, c) = rng.uniform(-1.0, 1.0);
    }
  }
  Vector targets = rng.uniform_vector(5, -1.0, 1.0);

  ForwardCache cache;
  forward_batch(model, X, RunMode::train, &rng, &cache);
  const Gradients grads = backward(model, cache, targets, Vector(), LossKind::mse);
  CHECK(grads.weights[0].col(dead).cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.biases[0][dead] == 0.0);
}

TEST_CASE("doubling example weights doubles the weighted-ce gradient") {
  GradCheckSetup s = make_setup(8, OutputHead::probability, 0.0);
  ForwardCache cache;
  forward_batch(s.model, s.X, RunMode::train, nullptr, &cache, &s.masks);
  const Gradients g1 = backward(s.model, cache, s.targets, s.weights, LossKind::weighted_ce);
  const Vector doubled = 2.0 * s.weights;
  const Gradients g2 = backward(s.model, cache, s.targets, doubled, LossKind::weighted_ce);
  for (std::size_t l = 0; l < g1.weights.size(); ++l) {
    CHECK((g2.weights[l] - 2.0 * g1.weights[l]).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((g2.biases[l] - 2.0 * g1.biases[l]).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Rng rng(9);
  MlpModel model = MlpModel::init(small_config(3, OutputHead::regression), rng);
  const MlpModel before = model;
  AdamState state = AdamState::init(model);
  adam_step(model, Gradients::zeros_like(model), state, 0.01);
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    CHECK(model.weights[l] == before.weights[l]);
    CHECK(model.biases[l] == before.biases[l]);
  }
  CHECK(state.step == 1);
}

TEST_CASE("adam: first step moves each parameter by about -lr * sign(g)") {
  Rng rng(10);
  MlpModel model = MlpModel::init(small_config(3, OutputHead::regression), rng);
  const MlpModel before = model;
  Gradients grads = Gradients::zeros_like(model);
  for (auto& w : grads.weights) w.setConstant(0.5);
  for (auto& b : grads.biases) b.setConstant(-0.25);
  AdamState state = AdamState::init(model);
  const double lr = 0.01;
  adam_step(model, grads, state, lr);
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const Matrix delta = model.weights[l] - before.weights[l];
    CHECK((delta.array() + lr).abs().maxCoeff() < lr * 1e-3);  // moved by ~ -lr
    const Vector bias_delta = model.biases[l] - before.biases[l];
    CHECK((bias_delta.array() - lr).abs().maxCoeff() < lr * 1e-3);  // sign(g) = -1
  }
}

TEST_CASE("adam: non-finite gradients raise TrainingDiverged") {
  Rng rng(11);
  MlpModel model = MlpModel::init(small_config(3, OutputHead::regression), rng);
  Gradients grads = Gradients::zeros_like(model);
  grads.weights[1](0, 0) = std::numeric_limits<double>::quiet_NaN();
  AdamState state = AdamState::init(model);
  CHECK_THROWS_AS(adam_step(model, grads, state, 0.01), TrainingDiverged);
}

TEST_CASE("adam: identical seeds give bitwise identical update trajectories") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    MlpModel model = MlpModel::init(small_config(4, OutputHead::regression), rng);
    AdamState state = AdamState::init(model);
    Matrix X(6, 4);
    Vector y(6);
    for (Index r = 0; r < 6; ++r) {
      for (Index c = 0; c < 4; ++c) X(r, c) = rng.uniform(-1, 1);
      y[r] = rng.uniform(-1, 1);
    }
    for (int step = 0; step < 25; ++step) {
      ForwardCache cache;
      forward_batch(model, X, RunMode::train, &rng, &cache);
      adam_step(model, backward(model, cache, y, Vector(), LossKind::mse), state,
                model.config.learning_rate);
    }
    return model;
  };
  const MlpModel a = run(77);
  const MlpModel b = run(77);
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    CHECK(a.weights[l] == b.weights[l]);
    CHECK(a.biases[l] == b.biases[l]);
  }
}
