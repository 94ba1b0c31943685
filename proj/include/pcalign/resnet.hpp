#pragma once

#include "pcalign/learning_rules.hpp"

namespace pcalign {

/// Linear residual network x_l = (I + W_l) x_{l-1}, l = 1..K, all blocks d x d.
/// The output is read at x_K (K = number of blocks).
class ResNetStack {
 public:
  ResNetStack() = default;
  explicit ResNetStack(std::vector<Matrix> residuals);

  int blocks() const { return static_cast<int>(residuals_.size()); }
  int width() const { return static_cast<int>(residuals_.front().rows()); }
  const Matrix& residual(int l) const;
  std::span<const Matrix> residuals() const { return residuals_; }
  std::uint64_t fingerprint() const;

 private:
  std::vector<Matrix> residuals_;
};

/// Activities x̂_0 = X, x̂_l = (I + W_l) x̂_{l-1}.
ForwardPass resnet_forward(const ResNetStack& stack, const Matrix& inputs);

/// Accumulated product (I + W_hi) ... (I + W_lo); identity when hi < lo.
Matrix tilde_product(const ResNetStack& stack, int hi, int lo);

/// tilde-S = sum_{l=1}^{K} W̃_{K:l+1} W̃_{K:l+1}^T (the l = K term is I).
Matrix tilde_s(const ResNetStack& stack);

/// Equilibrium with eps_K = tilde-S^{-1} r and eps_l = (I + W_{l+1})^T eps_{l+1}.
EquilibriumState resnet_equilibrium(const ResNetStack& stack, const Batch& batch);

UpdateReport resnet_bp_report(const ResNetStack& stack, const Batch& batch,
                              const RescalingConfig& rescaling = {});
UpdateReport resnet_pc_report(const ResNetStack& stack, const Batch& batch,
                              const RescalingConfig& rescaling = {});

/// sum_l W̃_{K:l+1} dW_l x̂_{l-1}.
Matrix resnet_prediction_change(const ResNetStack& stack, const ForwardPass& fwd,
                                std::span<const Matrix> deltas);

ResNetStack apply_update(const ResNetStack& stack, const UpdateReport& report, double lr);

}  // namespace pcalign
