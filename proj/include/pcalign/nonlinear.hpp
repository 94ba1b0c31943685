#pragma once

#include "pcalign/learning_rules.hpp"

namespace pcalign {

enum class Activation { Identity, ReLU, Sigmoid };

Matrix activate(Activation act, const Matrix& pre);
/// Elementwise derivative at the pre-activation. ReLU'(0) = 0.
Matrix activate_derivative(Activation act, const Matrix& pre);

/// f(x) = act_out(W_L act(... act(W_1 x))).
struct NonlinearNet {
  WeightStack weights;
  Activation hidden = Activation::ReLU;
  Activation output = Activation::Identity;

  Activation activation(int l) const { return l == weights.depth() ? output : hidden; }
};

struct NlForward {
  /// Pre-activations a_l = W_l x_{l-1}, index l-1 for l = 1..L.
  std::vector<Matrix> pre;
  /// Post-activations x_0 = X, x_l = act_l(a_l).
  std::vector<Matrix> post;

  const Matrix& prediction() const { return post.back(); }
};

NlForward nl_forward(const NonlinearNet& net, const Matrix& inputs);

/// Batch mean of 1/2 ||y - f(x)||^2.
double nl_loss(const NonlinearNet& net, const Batch& batch);

/// Forward-mode derivative of f(X) along weight perturbations `deltas`.
Matrix nl_prediction_change(const NonlinearNet& net, const NlForward& fwd,
                            std::span<const Matrix> deltas);

/// Negative gradient of nl_loss, optionally rescaled with feedforward-only factors.
UpdateReport nl_bp_report(const NonlinearNet& net, const Batch& batch,
                          const RescalingConfig& rescaling = {});

NonlinearNet nl_bp_step(const NonlinearNet& net, const Batch& batch, double lr);

struct InferenceConfig {
  int max_steps = 10000;
  double step_size = 0.05;
  /// Stop once the hidden-activity gradient norm falls below this; 0 disables.
  double early_stop_grad_norm = 0.0;
  /// Consecutive energy increases tolerated before InferenceDiverged.
  int divergence_patience = 100;
  bool record_energy = false;

  void validate() const;
};

struct InferenceResult {
  /// x*_0 .. x*_L with x*_0 = X and x*_L = Y.
  std::vector<Matrix> activities;
  double energy = 0.0;
  double grad_norm = 0.0;
  int steps = 0;
  std::vector<double> energy_trace;
};

/// Per-sample energy sum_l 1/2 ||x_l - act_l(W_l x_{l-1})||^2, averaged over the batch.
double nl_energy(const NonlinearNet& net, std::span<const Matrix> activities);

/// Gradient descent on the energy over hidden activities, starting from the
/// feedforward pass. Each sample relaxes independently at `step_size`.
InferenceResult nl_pc_infer(const NonlinearNet& net, const Batch& batch, const InferenceConfig& cfg);

/// Local PC update mean_b (act'(a*_l) * eps*_l) x*_{l-1}^T with optional rescaling
/// built from post-inference and feedforward activities.
UpdateReport nl_pc_report(const NonlinearNet& net, const Batch& batch,
                          std::span<const Matrix> equilibrium,
                          const RescalingConfig& rescaling = {});

NonlinearNet nl_pc_step(const NonlinearNet& net, const Batch& batch,
                        std::span<const Matrix> equilibrium, double lr,
                        const RescalingConfig& rescaling = {});

NonlinearNet apply_update(const NonlinearNet& net, const UpdateReport& report, double lr);

}  // namespace pcalign
