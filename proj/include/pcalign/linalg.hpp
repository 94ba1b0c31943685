#pragma once

#include "pcalign/types.hpp"

#include <cstdint>

namespace pcalign {

/// Solves S Z = R for symmetric positive definite S using a Cholesky factorisation.
Matrix spd_solve(const Matrix& spd, const Matrix& rhs);

/// Thin-SVD singular values in descending order.
Vector singular_values(const Matrix& m);

/// Moore-Penrose pseudo-inverse; singular values below `rel_cutoff * sigma_max` are dropped.
Matrix pseudo_inverse(const Matrix& m, double rel_cutoff = 1e-12);

/// Smallest and largest eigenvalue of (M + M^T) / 2.
struct EigenRange {
  double min;
  double max;
};
EigenRange symmetric_eigen_range(const Matrix& m);

bool all_finite(const Matrix& m);

/// Deterministic 64-bit fingerprint of the matrix entries and shape (FNV-1a over words).
std::uint64_t fingerprint(const Matrix& m, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace pcalign
