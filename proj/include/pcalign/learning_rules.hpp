#pragma once

#include "pcalign/metrics.hpp"
#include "pcalign/network.hpp"

#include <cstdint>
#include <vector>

namespace pcalign {

/// Analytic PC equilibrium for a clamped input/target batch.
struct EquilibriumState {
  /// x*_0 .. x*_L; x*_0 = X and x*_L = Y.
  std::vector<Matrix> activities;
  /// errors[l-1] = eps*_l for l = 1..L.
  std::vector<Matrix> errors;
  Matrix s;
  std::uint64_t stack_fingerprint = 0;
  std::uint64_t batch_fingerprint = 0;

  const Matrix& activity(int l) const { return activities.at(static_cast<std::size_t>(l)); }
  const Matrix& error(int l) const { return errors.at(static_cast<std::size_t>(l - 1)); }
  /// eps*_L = S^{-1} R.
  const Matrix& output_error() const { return errors.back(); }
};

enum class InversePolicy { PseudoInverse, SpectralRegularized };

/// Which layers receive adaptive learning rates. `ExcludeLast` follows the
/// l = 1..L-1 reading and leaves the last layer's factor at 1.
enum class AdaptiveLayers { All, ExcludeLast };

/// `Transposed` inverts E_B[x̂ x*ᵀ] (exact alignment); `Literal` inverts E_B[x* x̂ᵀ].
enum class DecorrelationOrientation { Transposed, Literal };

struct RescalingConfig {
  Rescaling mode = Rescaling::None;
  InversePolicy inverse_policy = InversePolicy::PseudoInverse;
  double alpha = 1e-5;
  AdaptiveLayers adaptive_layers = AdaptiveLayers::All;
  DecorrelationOrientation orientation = DecorrelationOrientation::Transposed;
  double degenerate_floor = 1e-12;
  double pinv_cutoff = 1e-12;

  void validate() const;
};

/// Weight-update proposal. `deltas` carry the descent sign; apply with W += lr * delta.
struct UpdateReport {
  Rule rule = Rule::BP;
  Rescaling rescaling = Rescaling::None;
  std::vector<Matrix> deltas;
  Matrix residual;
  /// First-order change of the batch predictions per unit learning rate.
  Matrix predicted_dydt;
  std::vector<AlignmentResult> ta_per_sample;

  double mean_ta() const { return mean_alignment(ta_per_sample); }
};

/// S = sum_{l=1}^{L} W_{L:l+1} W_{L:l+1}^T.
Matrix s_matrix(const WeightStack& stack);

EquilibriumState pc_equilibrium(const WeightStack& stack, const Batch& batch);

/// Batch mean of 1/2 ||y - W_{L:1} x||^2.
double bp_loss(const WeightStack& stack, const Batch& batch);

/// Batch mean of 1/2 r^T S^{-1} r (the energy with hidden activities at equilibrium).
double equilibrated_energy(const WeightStack& stack, const Batch& batch);

/// Batch mean of sum_l 1/2 ||x_l - W_l x_{l-1}||^2 for given activities x_0..x_L.
double pc_energy(const WeightStack& stack, std::span<const Matrix> activities);

UpdateReport bp_gradients(const WeightStack& stack, const Batch& batch,
                          const RescalingConfig& rescaling = {});

UpdateReport pc_gradients(const WeightStack& stack, const Batch& batch, const EquilibriumState& eq,
                          const RescalingConfig& rescaling = {});

/// Convenience: equilibrium + gradients.
UpdateReport pc_gradients(const WeightStack& stack, const Batch& batch,
                          const RescalingConfig& rescaling = {});

UpdateReport compute_update(Rule rule, const WeightStack& stack, const Batch& batch,
                            const RescalingConfig& rescaling = {});

/// alpha_l = 1 / mean_b(pre_b^T post_b) for each layer input pair.
/// Throws DegenerateActivity if a denominator is within `floor` of zero.
std::vector<double> activity_lr_factors(std::span<const Matrix> post, std::span<const Matrix> pre,
                                        double floor = 1e-12,
                                        AdaptiveLayers layers = AdaptiveLayers::All);

/// PC factors alpha_l = 1 / mean_b(x*_{l-1,b}^T x̂_{l-1,b}).
std::vector<double> adaptive_lr_factors(const EquilibriumState& eq, const WeightStack& stack,
                                        const Batch& batch, double floor = 1e-12,
                                        AdaptiveLayers layers = AdaptiveLayers::All);

/// Sigma_l = (1/B) post_{l-1} pre_{l-1}^T and its inverse per `cfg`.
Matrix cross_covariance(const Matrix& post, const Matrix& pre);
Matrix decorrelation_matrix(const Matrix& post, const Matrix& pre, const RescalingConfig& cfg);

/// Spectral floor eps = max(0, alpha * lambda_max - lambda_min) of the symmetrised matrix.
double spectral_floor(const Matrix& sigma, double alpha);

/// g * A with A the inverse (per `cfg`) of the cross-covariance built from
/// post/pre activities. When the batch is smaller than the layer width the
/// product is formed through a rank-B factorisation instead of a dense d x d
/// inverse; `allow_low_rank = false` forces the dense route.
Matrix right_decorrelate(const Matrix& g, const Matrix& post, const Matrix& pre,
                         const RescalingConfig& cfg, bool allow_low_rank = true);

/// Applies `cfg` in place, pairing deltas[l-1] with (post[l-1], pre[l-1]).
void rescale_deltas(std::vector<Matrix>& deltas, std::span<const Matrix> post,
                    std::span<const Matrix> pre, const RescalingConfig& cfg);

/// PC decorrelation matrices A_l, l = 1..L, from equilibrium and feedforward activities.
std::vector<Matrix> decorrelation_factors(const EquilibriumState& eq, const WeightStack& stack,
                                          const Batch& batch, const RescalingConfig& cfg);

/// First-order prediction change sum_l W_{L:l+1} dW_l X̂_{l-1} for arbitrary deltas.
Matrix prediction_change(const WeightStack& stack, const ForwardPass& fwd,
                         std::span<const Matrix> deltas);

/// W_l <- W_l + lr * delta_l. Pure.
WeightStack apply_update(const WeightStack& stack, const UpdateReport& report, double lr);
WeightStack apply_update(const WeightStack& stack, std::span<const Matrix> deltas, double lr);

}  // namespace pcalign
