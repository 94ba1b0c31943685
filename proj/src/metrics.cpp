#include "pcalign/metrics.hpp"

#include "pcalign/errors.hpp"
#include "pcalign/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pcalign {

AlignmentResult target_alignment(const Vector& residual, const Vector& dydt) {
  if (residual.size() != dydt.size()) {
    throw ShapeError("target alignment needs vectors of equal length");
  }
  AlignmentResult out;
  out.residual_norm = residual.norm();
  out.dydt_norm = dydt.norm();
  if (out.residual_norm <= kAlignmentFloor || out.dydt_norm <= kAlignmentFloor) return out;
  const double cosine = residual.dot(dydt) / (out.residual_norm * out.dydt_norm);
  out.value = std::clamp(cosine, -1.0, 1.0);
  return out;
}

std::vector<AlignmentResult> target_alignment_columns(const Matrix& residual, const Matrix& dydt) {
  if (residual.rows() != dydt.rows() || residual.cols() != dydt.cols()) {
    throw ShapeError("residual and prediction change differ in shape");
  }
  std::vector<AlignmentResult> out;
  out.reserve(static_cast<std::size_t>(residual.cols()));
  for (Eigen::Index b = 0; b < residual.cols(); ++b) {
    out.push_back(target_alignment(residual.col(b), dydt.col(b)));
  }
  return out;
}

double mean_alignment(std::span<const AlignmentResult> results) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : results) {
    if (r.defined()) {
      sum += *r.value;
      ++n;
    }
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / n;
}

double condition_number(const Matrix& w) {
  if (w.size() == 0 || w.isZero(0.0)) throw DomainError("condition number of a zero matrix");
  const Vector s = singular_values(w);
  const double smin = s(s.size() - 1);
  if (smin <= 1e-300) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

double weight_distance(const Matrix& composite_map, const Matrix& w_data) {
  if (composite_map.rows() != w_data.rows() || composite_map.cols() != w_data.cols()) {
    throw ShapeError("weight distance: composite map and W_data differ in shape");
  }
  return (w_data - composite_map).squaredNorm();
}

double weight_distance(const WeightStack& stack, const Matrix& w_data) {
  return weight_distance(composite(stack), w_data);
}

std::vector<double> activity_norm_profile(std::span<const Matrix> activities) {
  std::vector<double> out;
  out.reserve(activities.size());
  for (const auto& a : activities) {
    out.push_back(a.cols() == 0 ? 0.0 : a.squaredNorm() / static_cast<double>(a.cols()));
  }
  return out;
}

MeanSd mean_sd(std::span<const double> values) {
  double sum = 0.0;
  int n = 0;
  for (double v : values) {
    if (!std::isnan(v)) {
      sum += v;
      ++n;
    }
  }
  if (n == 0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), 0};
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) {
    if (!std::isnan(v)) ss += (v - mean) * (v - mean);
  }
  return {mean, n > 1 ? std::sqrt(ss / (n - 1)) : 0.0, n};
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ShapeError("spearman needs two equal series of length >= 2");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace pcalign
