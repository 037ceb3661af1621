#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "orars/rng.hpp"
#include "orars/types.hpp"

namespace orars {

enum class OutputHead {
  regression,   // raw affine output
  probability,  // logistic squashing to (0, 1)
};

enum class RunMode { train, inference };

/// Probabilities are clamped into [kProbClamp, 1 - kProbClamp] before any
/// log is taken, so cross-entropy stays finite at saturated outputs.
inline constexpr double kProbClamp = 1e-7;

/// Architecture and optimizer hyperparameters for the fixed 3-block MLP.
struct MlpConfig {
  Index input_dim = 0;
  Index hidden_units = 32;
  double dropout_rate = 0.0;   // in [0, 1)
  double learning_rate = 1e-3;
  OutputHead output = OutputHead::regression;

  static constexpr int n_blocks = 3;

  void validate() const;
};

/// Three blocks of (affine -> dropout -> ReLU) followed by an affine
/// projection to one unit. weights[l] maps layer l's input to its output;
/// layout is (fan_in x fan_out).
struct MlpModel {
  MlpConfig config;
  std::vector<Matrix> weights;  // 4 tensors
  std::vector<Vector> biases;   // 4 tensors

  /// Uniform init in +-sqrt(6 / (fan_in + fan_out)).
  static MlpModel init(const MlpConfig& config, Rng& rng);

  bool all_finite() const;
  Index parameter_count() const;
};

/// Inverted-dropout masks for one batch: entries are 0 (dropped) or
/// 1/(1-rate). `active == false` means identity.
struct DropoutMasks {
  std::array<Matrix, MlpConfig::n_blocks> mask;
  bool active = false;
};

DropoutMasks sample_dropout_masks(const MlpConfig& config, Index batch_size, Rng& rng);

/// Intermediate values kept for backpropagation.
struct ForwardCache {
  Matrix input;                                            // batch x input_dim
  std::array<Matrix, MlpConfig::n_blocks> activations;     // post-ReLU
  DropoutMasks masks;
  Vector preactivation;  // affine output before the head
  Vector output;         // after the head
};

/// Batch forward pass. In train mode dropout masks are sampled from `rng`
/// unless `fixed_masks` is supplied; inference mode ignores dropout and is a
/// pure function of (model, X).
Vector forward_batch(const MlpModel& model, const Eigen::Ref<const Matrix>& X, RunMode mode,
                     Rng* rng = nullptr, ForwardCache* cache = nullptr,
                     const DropoutMasks* fixed_masks = nullptr);

/// Single-sample forward pass.
double forward(const MlpModel& model, const Eigen::Ref<const Vector>& x, RunMode mode,
               Rng* rng = nullptr);

/// Weighted binary cross-entropy, normalized by example count:
///   -(1/n) * sum_i w_i * (t_i * ln p_i + (1 - t_i) * ln(1 - p_i))
/// Probabilities must lie in [0, 1] before clamping. With unit weights this
/// reduces to the plain mean cross-entropy.
double ce_loss(const Vector& targets, const Vector& probs, const Vector& weights);

enum class LossKind { weighted_ce, mse };

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  bool all_finite() const;
  static Gradients zeros_like(const MlpModel& model);
};

/// Analytic gradients of the selected loss for the batch recorded in
/// `cache`. For mse the loss is mean (output - target)^2; example weights
/// are ignored. For weighted_ce the loss is ce_loss over the cached
/// probability outputs (the clamp's dead zone propagates a zero gradient).
Gradients backward(const MlpModel& model, const ForwardCache& cache, const Vector& targets,
                   const Vector& example_weights, LossKind loss);

/// Adam first/second moment accumulators.
struct AdamState {
  std::vector<Matrix> m_w, v_w;
  std::vector<Vector> m_b, v_b;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState init(const MlpModel& model);
};

/// One bias-corrected Adam update, in place. Throws TrainingDiverged on
/// non-finite gradients.
void adam_step(MlpModel& model, const Gradients& grads, AdamState& state, double lr);

}  // namespace orars
