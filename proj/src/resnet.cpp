#include "pcalign/resnet.hpp"

#include "pcalign/errors.hpp"
#include "pcalign/linalg.hpp"

#include <cmath>
#include <string>

namespace pcalign {

namespace {

void check_batch(const ResNetStack& stack, const Batch& batch) {
  if (batch.inputs.cols() < 1) throw ShapeError("batch must hold at least one sample");
  if (batch.inputs.rows() != stack.width() || batch.targets.rows() != stack.width()) {
    throw ShapeError("residual network of width " + std::to_string(stack.width()) +
                     " got a batch with " + std::to_string(batch.inputs.rows()) + " -> " +
                     std::to_string(batch.targets.rows()) + " rows");
  }
  if (batch.targets.cols() != batch.inputs.cols()) {
    throw ShapeError("batch inputs and targets hold different sample counts");
  }
}

/// tilde_product(stack, K, l + 1) for l = 1..K, built from the output side.
std::vector<Matrix> tilde_partials(const ResNetStack& stack) {
  const int k = stack.blocks();
  std::vector<Matrix> out(static_cast<std::size_t>(k));
  out.back() = Matrix::Identity(stack.width(), stack.width());
  for (int l = k - 1; l >= 1; --l) {
    const auto idx = static_cast<std::size_t>(l - 1);
    out[idx] = out[idx + 1] + out[idx + 1] * stack.residual(l + 1);
  }
  return out;
}

UpdateReport finish(const ResNetStack& stack, const ForwardPass& fwd, UpdateReport report,
                    std::span<const Matrix> post, const RescalingConfig& rescaling) {
  report.rescaling = rescaling.mode;
  rescale_deltas(report.deltas, post, fwd.activities, rescaling);
  report.predicted_dydt = resnet_prediction_change(stack, fwd, report.deltas);
  report.ta_per_sample = target_alignment_columns(report.residual, report.predicted_dydt);
  return report;
}

}  // namespace

ResNetStack::ResNetStack(std::vector<Matrix> residuals) : residuals_(std::move(residuals)) {
  if (residuals_.empty()) throw ShapeError("residual network needs at least one block");
  const auto d = residuals_.front().rows();
  for (std::size_t l = 0; l < residuals_.size(); ++l) {
    if (residuals_[l].rows() != d || residuals_[l].cols() != d) {
      throw ShapeError("residual block " + std::to_string(l + 1) + " is " +
                       std::to_string(residuals_[l].rows()) + "x" + std::to_string(residuals_[l].cols()) +
                       ", expected " + std::to_string(d) + "x" + std::to_string(d));
    }
  }
}

const Matrix& ResNetStack::residual(int l) const {
  if (l < 1 || l > blocks()) {
    throw IndexError("residual block " + std::to_string(l) + " outside 1.." + std::to_string(blocks()));
  }
  return residuals_[static_cast<std::size_t>(l - 1)];
}

std::uint64_t ResNetStack::fingerprint() const {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (const auto& w : residuals_) h = pcalign::fingerprint(w, h);
  return h;
}

ForwardPass resnet_forward(const ResNetStack& stack, const Matrix& inputs) {
  if (inputs.rows() != stack.width()) throw ShapeError("input width does not match residual blocks");
  ForwardPass fwd;
  fwd.activities.reserve(static_cast<std::size_t>(stack.blocks()) + 1);
  fwd.activities.push_back(inputs);
  for (int l = 1; l <= stack.blocks(); ++l) {
    const Matrix& prev = fwd.activities.back();
    fwd.activities.push_back(prev + stack.residual(l) * prev);
  }
  return fwd;
}

Matrix tilde_product(const ResNetStack& stack, int hi, int lo) {
  if (lo < 1 || hi > stack.blocks()) throw IndexError("tilde product range outside the stack");
  Matrix out = Matrix::Identity(stack.width(), stack.width());
  for (int l = lo; l <= hi; ++l) out = out + stack.residual(l) * out;
  return out;
}

Matrix tilde_s(const ResNetStack& stack) {
  Matrix s = Matrix::Zero(stack.width(), stack.width());
  for (const auto& p : tilde_partials(stack)) s.noalias() += p * p.transpose();
  return 0.5 * (s + s.transpose());
}

EquilibriumState resnet_equilibrium(const ResNetStack& stack, const Batch& batch) {
  check_batch(stack, batch);
  const int k = stack.blocks();
  const ForwardPass fwd = resnet_forward(stack, batch.inputs);

  EquilibriumState eq;
  eq.s = tilde_s(stack);
  eq.errors.resize(static_cast<std::size_t>(k));
  eq.errors.back() = spd_solve(eq.s, batch.targets - fwd.prediction());
  for (int l = k - 1; l >= 1; --l) {
    const Matrix& next = eq.errors[static_cast<std::size_t>(l)];
    eq.errors[static_cast<std::size_t>(l - 1)] = next + stack.residual(l + 1).transpose() * next;
  }
  eq.activities.reserve(static_cast<std::size_t>(k) + 1);
  eq.activities.push_back(batch.inputs);
  for (int l = 1; l < k; ++l) {
    const Matrix& prev = eq.activities.back();
    eq.activities.push_back(prev + stack.residual(l) * prev + eq.error(l));
  }
  eq.activities.push_back(batch.targets);
  eq.stack_fingerprint = stack.fingerprint();
  eq.batch_fingerprint = fingerprint(batch.targets, fingerprint(batch.inputs));
  return eq;
}

Matrix resnet_prediction_change(const ResNetStack& stack, const ForwardPass& fwd,
                                std::span<const Matrix> deltas) {
  if (static_cast<int>(deltas.size()) != stack.blocks()) {
    throw ShapeError("prediction change needs one delta per residual block");
  }
  const auto ps = tilde_partials(stack);
  Matrix out = Matrix::Zero(stack.width(), fwd.prediction().cols());
  for (std::size_t l = 0; l < deltas.size(); ++l) {
    out.noalias() += ps[l] * (deltas[l] * fwd.activities[l]);
  }
  return out;
}

UpdateReport resnet_bp_report(const ResNetStack& stack, const Batch& batch,
                              const RescalingConfig& rescaling) {
  check_batch(stack, batch);
  const ForwardPass fwd = resnet_forward(stack, batch.inputs);
  const auto ps = tilde_partials(stack);
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  UpdateReport report;
  report.rule = Rule::BP;
  report.residual = batch.targets - fwd.prediction();
  for (int l = 1; l <= stack.blocks(); ++l) {
    report.deltas.push_back(inv_b * ps[static_cast<std::size_t>(l - 1)].transpose() *
                            (report.residual * fwd.at(l - 1).transpose()));
  }
  return finish(stack, fwd, std::move(report), fwd.activities, rescaling);
}

UpdateReport resnet_pc_report(const ResNetStack& stack, const Batch& batch,
                              const RescalingConfig& rescaling) {
  const EquilibriumState eq = resnet_equilibrium(stack, batch);
  const ForwardPass fwd = resnet_forward(stack, batch.inputs);
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  UpdateReport report;
  report.rule = Rule::PC;
  report.residual = batch.targets - fwd.prediction();
  for (int l = 1; l <= stack.blocks(); ++l) {
    report.deltas.push_back(inv_b * eq.error(l) * eq.activity(l - 1).transpose());
  }
  return finish(stack, fwd, std::move(report), eq.activities, rescaling);
}

ResNetStack apply_update(const ResNetStack& stack, const UpdateReport& report, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw DomainError("learning rate must be finite and >= 0");
  if (static_cast<int>(report.deltas.size()) != stack.blocks()) {
    throw ShapeError("update does not match the number of residual blocks");
  }
  std::vector<Matrix> out;
  out.reserve(report.deltas.size());
  for (int l = 1; l <= stack.blocks(); ++l) {
    const Matrix& d = report.deltas[static_cast<std::size_t>(l - 1)];
    if (d.rows() != stack.width() || d.cols() != stack.width()) {
      throw ShapeError("delta for block " + std::to_string(l) + " is not square at the stack width");
    }
    out.push_back(stack.residual(l) + lr * d);
  }
  return ResNetStack(std::move(out));
}

}  // namespace pcalign
