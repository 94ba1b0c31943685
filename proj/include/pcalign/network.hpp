#pragma once

#include "pcalign/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pcalign {

/// Layer widths d_0..d_L. Depth L is the number of weight matrices.
class NetworkSpec {
 public:
  explicit NetworkSpec(std::vector<int> layer_dims);

  /// Square network: `hidden_layers` hidden layers of `width`, input/output of `width`.
  static NetworkSpec square(int width, int hidden_layers);

  const std::vector<int>& dims() const { return dims_; }
  int depth() const { return static_cast<int>(dims_.size()) - 1; }
  int hidden_layers() const { return depth() - 1; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }

 private:
  std::vector<int> dims_;
};

/// Weight matrices W_1..W_L with W_l of shape d_l x d_{l-1}. Immutable once built.
class WeightStack {
 public:
  WeightStack() = default;
  explicit WeightStack(std::vector<Matrix> weights);

  int depth() const { return static_cast<int>(weights_.size()); }
  /// W_l, 1-based to match the layer numbering used throughout.
  const Matrix& weight(int l) const;
  std::span<const Matrix> weights() const { return weights_; }
  std::vector<int> dims() const;
  int input_dim() const { return static_cast<int>(weights_.front().cols()); }
  int output_dim() const { return static_cast<int>(weights_.back().rows()); }

  std::uint64_t fingerprint() const;

  bool operator==(const WeightStack& other) const;

 private:
  std::vector<Matrix> weights_;
};

/// Feedforward activities X̂_0 = X, X̂_l = W_l X̂_{l-1}.
struct ForwardPass {
  std::vector<Matrix> activities;

  const Matrix& prediction() const { return activities.back(); }
  const Matrix& at(int l) const { return activities.at(static_cast<std::size_t>(l)); }
};

ForwardPass forward(const WeightStack& stack, const Matrix& inputs);

/// W_{L:1} = W_L ... W_1.
Matrix composite(const WeightStack& stack);

/// W_{L:l+1}; partial(stack, L) is the identity of size d_L.
Matrix partial(const WeightStack& stack, int l);

/// All partial products, element l-1 holding W_{L:l+1} for l = 1..L.
std::vector<Matrix> partials(const WeightStack& stack);

enum class InitKind { KaimingUniform, NormPreservingNormal, LeCunNormal };

/// `kappa`, when set, conditions every layer after drawing it from `kind`.
struct InitScheme {
  InitKind kind = InitKind::NormPreservingNormal;
  std::uint64_t seed = 0;
  std::optional<double> kappa;
};

/// Deterministic in (spec, scheme). Layer l draws from its own derived stream.
WeightStack initialize(const NetworkSpec& spec, const InitScheme& scheme);

/// Draws one m x n matrix (m = fan-out, n = fan-in) from `kind`.
Matrix draw_weight(InitKind kind, int fan_out, int fan_in, std::uint64_t seed);

/// Replaces the singular values of W by a linearly spaced spectrum with
/// sigma_max / sigma_min = kappa, rescaled to keep the Frobenius norm.
/// Singular vectors are kept. Uses the thin SVD, k = min(m, n).
Matrix set_condition_number(const Matrix& w, double kappa);

WeightStack set_condition_number(const WeightStack& stack, double kappa);

}  // namespace pcalign
