#include "pcalign/linalg.hpp"

#include "pcalign/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cstring>

namespace pcalign {

Matrix spd_solve(const Matrix& spd, const Matrix& rhs) {
  Eigen::LLT<Matrix> llt(spd);
  if (llt.info() != Eigen::Success) {
    throw NumericError("Cholesky factorisation failed: matrix is not positive definite");
  }
  return llt.solve(rhs);
}

Vector singular_values(const Matrix& m) {
  if (std::min(m.rows(), m.cols()) <= 16) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
  }
  return Eigen::BDCSVD<Matrix>(m).singularValues();
}

Matrix pseudo_inverse(const Matrix& m, double rel_cutoff) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return Matrix::Zero(m.cols(), m.rows());
  const double cutoff = rel_cutoff * s(0);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

EigenRange symmetric_eigen_range(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericError("symmetric eigenvalue solver failed");
  const Vector& ev = eig.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

std::uint64_t fingerprint(const Matrix& m, std::uint64_t seed) {
  // FNV-1a over 64-bit words rather than bytes.
  std::uint64_t h = seed;
  auto mix = [&h](std::uint64_t word) {
    h ^= word;
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  };
  mix(static_cast<std::uint64_t>(m.rows()));
  mix(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::uint64_t word;
    std::memcpy(&word, m.data() + i, sizeof word);
    mix(word);
  }
  return h;
}

}  // namespace pcalign
