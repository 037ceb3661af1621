#include "orars/mlp.hpp"

#include <algorithm>
#include <cmath>

namespace orars {

namespace {

constexpr int kNumLayers = MlpConfig::n_blocks + 1;  // 3 hidden blocks + output projection

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

}  // namespace

void MlpConfig::validate() const {
  if (input_dim < 1) {
    throw InvalidConfig("MlpConfig: input_dim must be positive");
  }
  if (hidden_units < 1) {
    throw InvalidConfig("MlpConfig: hidden_units must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw InvalidConfig("MlpConfig: dropout_rate must be in [0, 1)");
  }
  if (!(learning_rate > 0.0)) {
    throw InvalidConfig("MlpConfig: learning_rate must be positive");
  }
}

MlpModel MlpModel::init(const MlpConfig& config, Rng& rng) {
  config.validate();
  MlpModel model;
  model.config = config;
  const Index h = config.hidden_units;
  const std::array<std::pair<Index, Index>, kNumLayers> shapes = {{
      {config.input_dim, h},
      {h, h},
      {h, h},
      {h, Index{1}},
  }};
  for (const auto& [fan_in, fan_out] : shapes) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (Index c = 0; c < fan_out; ++c) {
      for (Index r = 0; r < fan_in; ++r) {
        w(r, c) = rng.uniform(-bound, bound);
      }
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Vector::Zero(fan_out));
  }
  return model;
}

bool MlpModel::all_finite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (!b.allFinite()) return false;
  }
  return true;
}

Index MlpModel::parameter_count() const {
  Index n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

DropoutMasks sample_dropout_masks(const MlpConfig& config, Index batch_size, Rng& rng) {
  DropoutMasks masks;
  if (config.dropout_rate <= 0.0) {
    return masks;
  }
  masks.active = true;
  const double keep = 1.0 - config.dropout_rate;
  const double scale = 1.0 / keep;
  for (int l = 0; l < MlpConfig::n_blocks; ++l) {
    Matrix m(batch_size, config.hidden_units);
    for (Index c = 0; c < m.cols(); ++c) {
      for (Index r = 0; r < m.rows(); ++r) {
        m(r, c) = rng.uniform() < keep ? scale : 0.0;
      }
    }
    masks.mask[static_cast<std::size_t>(l)] = std::move(m);
  }
  return masks;
}

Vector forward_batch(const MlpModel& model, const Eigen::Ref<const Matrix>& X, RunMode mode,
                     Rng* rng, ForwardCache* cache, const DropoutMasks* fixed_masks) {
  const auto& cfg = model.config;
  if (X.cols() != cfg.input_dim) {
    throw ContractViolation("forward_batch: input dim " + std::to_string(X.cols()) +
                            " != configured " + std::to_string(cfg.input_dim));
  }

  DropoutMasks masks;
  if (mode == RunMode::train && cfg.dropout_rate > 0.0) {
    if (fixed_masks != nullptr) {
      masks = *fixed_masks;
    } else {
      if (rng == nullptr) {
        throw ContractViolation("forward_batch: train mode with dropout needs an rng");
      }
      masks = sample_dropout_masks(cfg, X.rows(), *rng);
    }
  }

  Matrix a = X;
  std::array<Matrix, MlpConfig::n_blocks> activations;
  for (int l = 0; l < MlpConfig::n_blocks; ++l) {
    Matrix z = (a * model.weights[static_cast<std::size_t>(l)]).rowwise() +
               model.biases[static_cast<std::size_t>(l)].transpose();
    if (masks.active) {
      z.array() *= masks.mask[static_cast<std::size_t>(l)].array();
    }
    a = z.cwiseMax(0.0);
    activations[static_cast<std::size_t>(l)] = a;
  }

  Vector pre = (a * model.weights[kNumLayers - 1]).col(0);
  pre.array() += model.biases[kNumLayers - 1][0];
  Vector out = pre;
  if (cfg.output == OutputHead::probability) {
    out = pre.unaryExpr([](double z) { return sigmoid(z); });
  }

  if (cache != nullptr) {
    cache->input = X;
    cache->activations = std::move(activations);
    cache->masks = std::move(masks);
    cache->preactivation = pre;
    cache->output = out;
  }
  return out;
}

double forward(const MlpModel& model, const Eigen::Ref<const Vector>& x, RunMode mode, Rng* rng) {
  return forward_batch(model, x.transpose(), mode, rng)[0];
}

double ce_loss(const Vector& targets, const Vector& probs, const Vector& weights) {
  const Index n = targets.size();
  if (probs.size() != n || weights.size() != n) {
    throw ContractViolation("ce_loss: length mismatch");
  }
  if (n == 0) {
    throw ContractViolation("ce_loss: empty input");
  }
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double t = targets[i];
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidData("ce_loss: probability outside [0, 1] at index " + std::to_string(i));
    }
    if (!(t == 0.0 || t == 1.0)) {
      throw InvalidData("ce_loss: target not binary at index " + std::to_string(i));
    }
    const double pc = clamp_prob(p);
    sum += weights[i] * (t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc));
  }
  return -sum / static_cast<double>(n);
}

bool Gradients::all_finite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (!b.allFinite()) return false;
  }
  return true;
}

Gradients Gradients::zeros_like(const MlpModel& model) {
  Gradients g;
  for (const auto& w : model.weights) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : model.biases) g.biases.push_back(Vector::Zero(b.size()));
  return g;
}

Gradients backward(const MlpModel& model, const ForwardCache& cache, const Vector& targets,
                   const Vector& example_weights, LossKind loss) {
  const Index batch = cache.input.rows();
  if (targets.size() != batch) {
    throw ContractViolation("backward: target count != batch size");
  }
  const double inv_n = 1.0 / static_cast<double>(batch);

  // d(loss)/d(preactivation of the output unit)
  Vector dout(batch);
  if (loss == LossKind::mse) {
    dout = 2.0 * inv_n * (cache.output - targets);
  } else {
    if (example_weights.size() != batch) {
      throw ContractViolation("backward: weight count != batch size");
    }
    for (Index i = 0; i < batch; ++i) {
      const double p = cache.output[i];
      const double pc = clamp_prob(p);
      if (p != pc) {
        dout[i] = 0.0;  // clamped region is flat
        continue;
      }
      const double t = targets[i];
      const double dl_dp = -example_weights[i] * (t / pc - (1.0 - t) / (1.0 - pc)) * inv_n;
      dout[i] = dl_dp * p * (1.0 - p);
    }
  }

  Gradients grads;
  grads.weights.resize(kNumLayers);
  grads.biases.resize(kNumLayers);

  grads.weights[kNumLayers - 1] =
      cache.activations[MlpConfig::n_blocks - 1].transpose() * dout;
  grads.biases[kNumLayers - 1] = Vector::Constant(1, dout.sum());

  Matrix da = dout * model.weights[kNumLayers - 1].transpose();  // batch x hidden
  for (int l = MlpConfig::n_blocks - 1; l >= 0; --l) {
    const auto lu = static_cast<std::size_t>(l);
    // ReLU gate: post-activation > 0 iff the pre-activation passed through.
    Matrix dz = da.cwiseProduct((cache.activations[lu].array() > 0.0).cast<double>().matrix());
    if (cache.masks.active) {
      dz.array() *= cache.masks.mask[lu].array();
    }
    const Matrix& layer_input = (l == 0) ? cache.input : cache.activations[lu - 1];
    grads.weights[lu] = layer_input.transpose() * dz;
    grads.biases[lu] = dz.colwise().sum().transpose();
    if (l > 0) {
      da = dz * model.weights[lu].transpose();
    }
  }
  return grads;
}

AdamState AdamState::init(const MlpModel& model) {
  AdamState s;
  for (const auto& w : model.weights) {
    s.m_w.push_back(Matrix::Zero(w.rows(), w.cols()));
    s.v_w.push_back(Matrix::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : model.biases) {
    s.m_b.push_back(Vector::Zero(b.size()));
    s.v_b.push_back(Vector::Zero(b.size()));
  }
  return s;
}

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state, double lr) {
  if (!grads.all_finite()) {
    throw TrainingDiverged("adam_step: non-finite gradient");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);

  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    auto& m = state.m_w[l];
    auto& v = state.v_w[l];
    m = state.beta1 * m + (1.0 - state.beta1) * grads.weights[l];
    v.array() = state.beta2 * v.array() + (1.0 - state.beta2) * grads.weights[l].array().square();
    model.weights[l].array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.epsilon);
  }
  for (std::size_t l = 0; l < model.biases.size(); ++l) {
    auto& m = state.m_b[l];
    auto& v = state.v_b[l];
    m = state.beta1 * m + (1.0 - state.beta1) * grads.biases[l];
    v.array() = state.beta2 * v.array() + (1.0 - state.beta2) * grads.biases[l].array().square();
    model.biases[l].array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.epsilon);
  }
  if (!model.all_finite()) {
    throw TrainingDiverged("adam_step: parameters became non-finite");
  }
}

}  // namespace orars
