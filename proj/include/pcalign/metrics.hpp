#pragma once

#include "pcalign/network.hpp"

#include <limits>
#include <optional>
#include <span>

namespace pcalign {

inline constexpr double kAlignmentFloor = 1e-12;

/// Cosine between residual and prediction change. `value` is empty when
/// either norm is at or below kAlignmentFloor.
struct AlignmentResult {
  std::optional<double> value;
  double residual_norm = 0.0;
  double dydt_norm = 0.0;

  bool defined() const { return value.has_value(); }
  /// NaN when undefined; convenient for CSV output.
  double value_or_nan() const { return value.value_or(std::numeric_limits<double>::quiet_NaN()); }
};

AlignmentResult target_alignment(const Vector& residual, const Vector& dydt);

/// Per-column alignment of two d x B matrices.
std::vector<AlignmentResult> target_alignment_columns(const Matrix& residual, const Matrix& dydt);

/// Arithmetic mean over defined entries; NaN if none are defined.
double mean_alignment(std::span<const AlignmentResult> results);

/// sigma_max / sigma_min over the thin SVD. +inf if sigma_min <= 1e-300.
double condition_number(const Matrix& w);

/// Squared Frobenius norm of W_data - W_{L:1}.
double weight_distance(const WeightStack& stack, const Matrix& w_data);
double weight_distance(const Matrix& composite_map, const Matrix& w_data);

/// Mean over the batch of squared column norms of each activity matrix.
std::vector<double> activity_norm_profile(std::span<const Matrix> activities);

/// Sample mean and sample standard deviation, skipping NaNs.
struct MeanSd {
  double mean;
  double sd;
  int count;
};
MeanSd mean_sd(std::span<const double> values);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace pcalign
