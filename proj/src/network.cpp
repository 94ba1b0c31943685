#include "pcalign/network.hpp"

#include "pcalign/errors.hpp"
#include "pcalign/linalg.hpp"
#include "pcalign/rng.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace pcalign {

NetworkSpec::NetworkSpec(std::vector<int> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) throw ShapeError("network needs at least one weight matrix (two widths)");
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i] < 1) throw ShapeError("layer " + std::to_string(i) + " has non-positive width");
  }
}

NetworkSpec NetworkSpec::square(int width, int hidden_layers) {
  return NetworkSpec(std::vector<int>(static_cast<std::size_t>(hidden_layers) + 2, width));
}

WeightStack::WeightStack(std::vector<Matrix> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ShapeError("weight stack must hold at least one matrix");
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i].size() == 0) {
      throw ShapeError("W_" + std::to_string(i + 1) + " is empty");
    }
    if (i > 0 && weights_[i].cols() != weights_[i - 1].rows()) {
      throw ShapeError("W_" + std::to_string(i + 1) + " has " +
                       std::to_string(weights_[i].cols()) + " columns but W_" + std::to_string(i) +
                       " has " + std::to_string(weights_[i - 1].rows()) + " rows");
    }
  }
}

const Matrix& WeightStack::weight(int l) const {
  if (l < 1 || l > depth()) {
    throw IndexError("layer index " + std::to_string(l) + " outside 1.." + std::to_string(depth()));
  }
  return weights_[static_cast<std::size_t>(l - 1)];
}

std::vector<int> WeightStack::dims() const {
  std::vector<int> d;
  d.reserve(weights_.size() + 1);
  d.push_back(input_dim());
  for (const auto& w : weights_) d.push_back(static_cast<int>(w.rows()));
  return d;
}

std::uint64_t WeightStack::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& w : weights_) h = pcalign::fingerprint(w, h);
  return h;
}

bool WeightStack::operator==(const WeightStack& other) const {
  if (weights_.size() != other.weights_.size()) return false;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i].rows() != other.weights_[i].rows() ||
        weights_[i].cols() != other.weights_[i].cols() || weights_[i] != other.weights_[i]) {
      return false;
    }
  }
  return true;
}

ForwardPass forward(const WeightStack& stack, const Matrix& inputs) {
  if (inputs.rows() != stack.input_dim()) {
    throw ShapeError("input has " + std::to_string(inputs.rows()) + " rows but W_1 expects " +
                     std::to_string(stack.input_dim()));
  }
  ForwardPass pass;
  pass.activities.reserve(static_cast<std::size_t>(stack.depth()) + 1);
  pass.activities.push_back(inputs);
  for (const auto& w : stack.weights()) pass.activities.push_back(w * pass.activities.back());
  return pass;
}

Matrix composite(const WeightStack& stack) {
  Matrix out = stack.weight(1);
  for (int l = 2; l <= stack.depth(); ++l) out = stack.weight(l) * out;
  return out;
}

Matrix partial(const WeightStack& stack, int l) {
  if (l < 1 || l > stack.depth()) {
    throw IndexError("partial product index " + std::to_string(l) + " outside 1.." +
                     std::to_string(stack.depth()));
  }
  Matrix out = Matrix::Identity(stack.output_dim(), stack.output_dim());
  for (int k = stack.depth(); k > l; --k) out = out * stack.weight(k);
  return out;
}

std::vector<Matrix> partials(const WeightStack& stack) {
  const int depth = stack.depth();
  std::vector<Matrix> out(static_cast<std::size_t>(depth));
  out[static_cast<std::size_t>(depth - 1)] = Matrix::Identity(stack.output_dim(), stack.output_dim());
  for (int l = depth - 1; l >= 1; --l) {
    out[static_cast<std::size_t>(l - 1)] = out[static_cast<std::size_t>(l)] * stack.weight(l + 1);
  }
  return out;
}

Matrix draw_weight(InitKind kind, int fan_out, int fan_in, std::uint64_t seed) {
  Rng rng(seed);
  Matrix w(fan_out, fan_in);
  // Row-major fill order keeps draws independent of Eigen's storage order.
  for (int i = 0; i < fan_out; ++i) {
    for (int j = 0; j < fan_in; ++j) {
      switch (kind) {
        case InitKind::KaimingUniform: {
          const double bound = std::sqrt(1.0 / fan_in);
          w(i, j) = rng.uniform(-bound, bound);
          break;
        }
        case InitKind::NormPreservingNormal:
          w(i, j) = rng.normal(0.0, 1.0 / std::sqrt(static_cast<double>(fan_out)));
          break;
        case InitKind::LeCunNormal:
          w(i, j) = rng.normal(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
          break;
      }
    }
  }
  return w;
}

WeightStack initialize(const NetworkSpec& spec, const InitScheme& scheme) {
  std::vector<Matrix> weights;
  weights.reserve(static_cast<std::size_t>(spec.depth()));
  for (int l = 1; l <= spec.depth(); ++l) {
    const auto idx = static_cast<std::size_t>(l);
    Matrix w = draw_weight(scheme.kind, spec.dims()[idx], spec.dims()[idx - 1],
                           derive_seed(scheme.seed, stream::kInit, static_cast<std::uint64_t>(l)));
    if (scheme.kappa) w = set_condition_number(w, *scheme.kappa);
    weights.push_back(std::move(w));
  }
  return WeightStack(std::move(weights));
}

Matrix set_condition_number(const Matrix& w, double kappa) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
    throw DomainError("target condition number must be a finite value >= 1");
  }
  const Eigen::Index k = std::min(w.rows(), w.cols());
  Matrix u;
  Matrix v;
  Vector s;
  if (k <= 64) {
    Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  } else {
    Eigen::BDCSVD<Matrix> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  }
  if (k == 0 || s(0) == 0.0) throw DomainError("cannot condition a rank-0 matrix");
  if (k == 1) {
    if (kappa > 1.0) throw DomainError("a single singular value cannot realise kappa > 1");
    return w;
  }

  const double sigma_max = s(0);
  Vector shaped(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(k - 1);
    // 1 - frac (1 - 1/kappa), written so the last entry is exactly 1/kappa.
    shaped(i) = sigma_max * ((1.0 - frac) + frac / kappa);
  }
  shaped *= s.norm() / shaped.norm();
  return u * shaped.asDiagonal() * v.transpose();
}

WeightStack set_condition_number(const WeightStack& stack, double kappa) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(stack.depth()));
  for (const auto& w : stack.weights()) out.push_back(set_condition_number(w, kappa));
  return WeightStack(std::move(out));
}

}  // namespace pcalign
