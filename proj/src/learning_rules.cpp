#include "pcalign/learning_rules.hpp"

#include "pcalign/errors.hpp"
#include "pcalign/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <string>

namespace pcalign {

namespace {

void check_batch(const WeightStack& stack, const Batch& batch) {
  if (batch.inputs.cols() < 1) throw ShapeError("batch must hold at least one sample");
  if (batch.inputs.rows() != stack.input_dim()) {
    throw ShapeError("batch inputs have " + std::to_string(batch.inputs.rows()) +
                     " rows, layer 1 expects " + std::to_string(stack.input_dim()));
  }
  if (batch.targets.rows() != stack.output_dim()) {
    throw ShapeError("batch targets have " + std::to_string(batch.targets.rows()) + " rows, layer " +
                     std::to_string(stack.depth()) + " produces " + std::to_string(stack.output_dim()));
  }
  if (batch.targets.cols() != batch.inputs.cols()) {
    throw ShapeError("batch inputs and targets hold different sample counts");
  }
}

std::uint64_t batch_fingerprint(const Batch& batch) {
  return fingerprint(batch.targets, fingerprint(batch.inputs));
}

Matrix orthonormal_basis(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

}  // namespace

void RescalingConfig::validate() const {
  if (inverse_policy == InversePolicy::SpectralRegularized && !(alpha > 0.0)) {
    throw ValidationError({"rescaling.alpha: must be > 0 for spectral regularisation"});
  }
  if (!(degenerate_floor >= 0.0)) throw ValidationError({"rescaling.degenerate_floor: must be >= 0"});
  if (!(pinv_cutoff >= 0.0)) throw ValidationError({"rescaling.pinv_cutoff: must be >= 0"});
}

namespace {

Matrix s_from_partials(std::span<const Matrix> ps) {
  Matrix s = Matrix::Zero(ps.back().rows(), ps.back().rows());
  for (const auto& p : ps) s.noalias() += p * p.transpose();
  return 0.5 * (s + s.transpose());
}

EquilibriumState equilibrium_from(const WeightStack& stack, const Batch& batch, const ForwardPass& fwd,
                                  std::span<const Matrix> ps) {
  const int depth = stack.depth();
  const Matrix residual = batch.targets - fwd.prediction();

  EquilibriumState eq;
  eq.s = s_from_partials(ps);
  eq.errors.resize(static_cast<std::size_t>(depth));
  eq.errors.back() = spd_solve(eq.s, residual);
  for (int l = depth - 1; l >= 1; --l) {
    eq.errors[static_cast<std::size_t>(l - 1)] =
        stack.weight(l + 1).transpose() * eq.errors[static_cast<std::size_t>(l)];
  }

  eq.activities.reserve(static_cast<std::size_t>(depth) + 1);
  eq.activities.push_back(batch.inputs);
  for (int l = 1; l < depth; ++l) {
    eq.activities.push_back(stack.weight(l) * eq.activities.back() + eq.error(l));
  }
  // The output layer is clamped to the target.
  eq.activities.push_back(batch.targets);
  eq.stack_fingerprint = stack.fingerprint();
  eq.batch_fingerprint = batch_fingerprint(batch);
  return eq;
}

Matrix prediction_change_from(std::span<const Matrix> ps, const ForwardPass& fwd,
                              std::span<const Matrix> deltas) {
  Matrix out = Matrix::Zero(ps.back().rows(), fwd.prediction().cols());
  for (std::size_t l = 0; l < deltas.size(); ++l) {
    out.noalias() += ps[l] * (deltas[l] * fwd.activities[l]);
  }
  return out;
}

UpdateReport pc_report_from(const WeightStack& stack, const Batch& batch, const EquilibriumState& eq,
                            const ForwardPass& fwd, std::span<const Matrix> ps,
                            const RescalingConfig& rescaling) {
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  UpdateReport report;
  report.rule = Rule::PC;
  report.residual = batch.targets - fwd.prediction();
  for (int l = 1; l <= stack.depth(); ++l) {
    report.deltas.push_back(inv_b * eq.error(l) * eq.activity(l - 1).transpose());
  }
  report.rescaling = rescaling.mode;
  rescale_deltas(report.deltas, eq.activities, fwd.activities, rescaling);
  report.predicted_dydt = prediction_change_from(ps, fwd, report.deltas);
  report.ta_per_sample = target_alignment_columns(report.residual, report.predicted_dydt);
  return report;
}

}  // namespace

Matrix s_matrix(const WeightStack& stack) { return s_from_partials(partials(stack)); }

EquilibriumState pc_equilibrium(const WeightStack& stack, const Batch& batch) {
  check_batch(stack, batch);
  return equilibrium_from(stack, batch, forward(stack, batch.inputs), partials(stack));
}

double bp_loss(const WeightStack& stack, const Batch& batch) {
  check_batch(stack, batch);
  const Matrix r = batch.targets - composite(stack) * batch.inputs;
  return 0.5 * r.squaredNorm() / static_cast<double>(batch.size());
}

double equilibrated_energy(const WeightStack& stack, const Batch& batch) {
  check_batch(stack, batch);
  const Matrix r = batch.targets - composite(stack) * batch.inputs;
  const Matrix z = spd_solve(s_matrix(stack), r);
  return 0.5 * r.cwiseProduct(z).sum() / static_cast<double>(batch.size());
}

double pc_energy(const WeightStack& stack, std::span<const Matrix> activities) {
  if (static_cast<int>(activities.size()) != stack.depth() + 1) {
    throw ShapeError("pc_energy needs L + 1 activity matrices");
  }
  double e = 0.0;
  for (int l = 1; l <= stack.depth(); ++l) {
    const auto idx = static_cast<std::size_t>(l);
    e += (activities[idx] - stack.weight(l) * activities[idx - 1]).squaredNorm();
  }
  return 0.5 * e / static_cast<double>(activities.front().cols());
}

std::vector<double> activity_lr_factors(std::span<const Matrix> post, std::span<const Matrix> pre,
                                        double floor, AdaptiveLayers layers) {
  if (post.size() != pre.size()) throw ShapeError("activity factor lists differ in length");
  std::vector<double> out;
  out.reserve(post.size());
  for (std::size_t l = 0; l < post.size(); ++l) {
    if (layers == AdaptiveLayers::ExcludeLast && l + 1 == post.size() && post.size() > 1) {
      out.push_back(1.0);
      continue;
    }
    const double c = post[l].cwiseProduct(pre[l]).sum() / static_cast<double>(post[l].cols());
    if (!std::isfinite(c) || std::abs(c) <= floor) {
      throw DegenerateActivity("activity product for layer " + std::to_string(l + 1) + " is " +
                               std::to_string(c) + ", within the degeneracy floor");
    }
    out.push_back(1.0 / c);
  }
  return out;
}

std::vector<double> adaptive_lr_factors(const EquilibriumState& eq, const WeightStack& stack,
                                        const Batch& batch, double floor, AdaptiveLayers layers) {
  check_batch(stack, batch);
  const ForwardPass fwd = forward(stack, batch.inputs);
  const auto depth = static_cast<std::size_t>(stack.depth());
  return activity_lr_factors(std::span(eq.activities).first(depth),
                             std::span(fwd.activities).first(depth), floor, layers);
}

Matrix cross_covariance(const Matrix& post, const Matrix& pre) {
  if (post.rows() != pre.rows() || post.cols() != pre.cols()) {
    throw ShapeError("cross-covariance needs activity matrices of equal shape");
  }
  return post * pre.transpose() / static_cast<double>(post.cols());
}

double spectral_floor(const Matrix& sigma, double alpha) {
  const EigenRange range = symmetric_eigen_range(sigma);
  return std::max(0.0, alpha * range.max - range.min);
}

namespace {

/// The matrix that gets inverted: E_B[pre post^T] (Transposed) or E_B[post pre^T] (Literal).
Matrix oriented_covariance(const Matrix& post, const Matrix& pre, DecorrelationOrientation o) {
  return o == DecorrelationOrientation::Transposed ? cross_covariance(pre, post)
                                                   : cross_covariance(post, pre);
}

Matrix invert_dense(const Matrix& m, const RescalingConfig& cfg) {
  if (!m.allFinite()) throw NumericError("non-finite entries in activity covariance");
  if (cfg.inverse_policy == InversePolicy::PseudoInverse) return pseudo_inverse(m, cfg.pinv_cutoff);
  const double eps = spectral_floor(m, cfg.alpha);
  const Matrix reg = m + eps * Matrix::Identity(m.rows(), m.cols());
  Eigen::FullPivLU<Matrix> lu(reg);
  if (!lu.isInvertible()) throw NumericError("regularised activity covariance is singular");
  return lu.inverse();
}

}  // namespace

Matrix decorrelation_matrix(const Matrix& post, const Matrix& pre, const RescalingConfig& cfg) {
  return invert_dense(oriented_covariance(post, pre, cfg.orientation), cfg);
}

Matrix right_decorrelate(const Matrix& g, const Matrix& post, const Matrix& pre,
                         const RescalingConfig& cfg, bool allow_low_rank) {
  const Eigen::Index d = post.rows();
  const Eigen::Index batch = post.cols();
  if (g.cols() != d) throw ShapeError("update and activity widths differ");
  if (!post.allFinite() || !pre.allFinite()) throw NumericError("non-finite activities in decorrelation");

  // M = (1/B) left right^T is the matrix being inverted.
  const bool transposed = cfg.orientation == DecorrelationOrientation::Transposed;
  const Matrix left = (transposed ? pre : post) / static_cast<double>(batch);
  const Matrix& right = transposed ? post : pre;

  if (allow_low_rank && cfg.inverse_policy == InversePolicy::PseudoInverse && batch < d) {
    // M = Ql (Rl Rr^T) Qr^T with orthonormal Ql, Qr, so pinv(M) = Qr pinv(C) Ql^T.
    Eigen::HouseholderQR<Matrix> ql(left);
    Eigen::HouseholderQR<Matrix> qr(right);
    const Matrix q_left = ql.householderQ() * Matrix::Identity(d, batch);
    const Matrix q_right = qr.householderQ() * Matrix::Identity(d, batch);
    const Matrix r_left = ql.matrixQR().topRows(batch).triangularView<Eigen::Upper>();
    const Matrix r_right = qr.matrixQR().topRows(batch).triangularView<Eigen::Upper>();
    const Matrix core = r_left * r_right.transpose();
    return ((g * q_right) * pseudo_inverse(core, cfg.pinv_cutoff)) * q_left.transpose();
  }

  if (allow_low_rank && cfg.inverse_policy == InversePolicy::SpectralRegularized && 2 * batch < d) {
    // sym(M) lives in span[left, right]; outside it the spectrum is zero.
    Matrix span(d, 2 * batch);
    span << left, right;
    const Matrix basis = orthonormal_basis(span);
    const Matrix compressed = basis.transpose() * (left * (right.transpose() * basis));
    const EigenRange range = symmetric_eigen_range(compressed);
    const double lmin = std::min(0.0, range.min);
    const double lmax = std::max(0.0, range.max);
    const double eps = std::max(0.0, cfg.alpha * lmax - lmin);
    if (!(eps > 0.0)) throw NumericError("activity covariance vanished; cannot regularise");
    // Woodbury: (eps I + U V^T)^{-1} = (I - U (eps I + V^T U)^{-1} V^T) / eps.
    const Matrix small = eps * Matrix::Identity(batch, batch) + right.transpose() * left;
    // (g U) small^{-1} via the transposed system.
    Eigen::FullPivLU<Matrix> lu(small.transpose());
    if (!lu.isInvertible()) throw NumericError("regularised activity covariance is singular");
    const Matrix gu = g * left;
    return (g - lu.solve(gu.transpose()).transpose() * right.transpose()) / eps;
  }

  return g * invert_dense(left * right.transpose(), cfg);
}

void rescale_deltas(std::vector<Matrix>& deltas, std::span<const Matrix> post,
                    std::span<const Matrix> pre, const RescalingConfig& cfg) {
  const std::size_t depth = deltas.size();
  if (post.size() < depth || pre.size() < depth) throw ShapeError("too few activities to rescale deltas");
  switch (cfg.mode) {
    case Rescaling::None:
      return;
    case Rescaling::AdaptiveLR: {
      const auto factors = activity_lr_factors(post.first(depth), pre.first(depth),
                                               cfg.degenerate_floor, cfg.adaptive_layers);
      for (std::size_t l = 0; l < depth; ++l) deltas[l] *= factors[l];
      return;
    }
    case Rescaling::Decorrelation:
      for (std::size_t l = 0; l < depth; ++l) {
        deltas[l] = right_decorrelate(deltas[l], post[l], pre[l], cfg);
      }
      return;
  }
}

std::vector<Matrix> decorrelation_factors(const EquilibriumState& eq, const WeightStack& stack,
                                          const Batch& batch, const RescalingConfig& cfg) {
  check_batch(stack, batch);
  const ForwardPass fwd = forward(stack, batch.inputs);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(stack.depth()));
  for (int l = 1; l <= stack.depth(); ++l) {
    out.push_back(decorrelation_matrix(eq.activity(l - 1), fwd.at(l - 1), cfg));
  }
  return out;
}

Matrix prediction_change(const WeightStack& stack, const ForwardPass& fwd,
                         std::span<const Matrix> deltas) {
  if (static_cast<int>(deltas.size()) != stack.depth()) {
    throw ShapeError("prediction change needs one delta per layer");
  }
  return prediction_change_from(partials(stack), fwd, deltas);
}

UpdateReport bp_gradients(const WeightStack& stack, const Batch& batch,
                          const RescalingConfig& rescaling) {
  check_batch(stack, batch);
  const ForwardPass fwd = forward(stack, batch.inputs);
  const auto ps = partials(stack);
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  UpdateReport report;
  report.rule = Rule::BP;
  report.residual = batch.targets - fwd.prediction();
  for (int l = 1; l <= stack.depth(); ++l) {
    const auto idx = static_cast<std::size_t>(l - 1);
    report.deltas.push_back(inv_b * ps[idx].transpose() * (report.residual * fwd.at(l - 1).transpose()));
  }
  report.rescaling = rescaling.mode;
  rescale_deltas(report.deltas, fwd.activities, fwd.activities, rescaling);
  report.predicted_dydt = prediction_change_from(ps, fwd, report.deltas);
  report.ta_per_sample = target_alignment_columns(report.residual, report.predicted_dydt);
  return report;
}

UpdateReport pc_gradients(const WeightStack& stack, const Batch& batch, const EquilibriumState& eq,
                          const RescalingConfig& rescaling) {
  check_batch(stack, batch);
  if (eq.stack_fingerprint != stack.fingerprint() || eq.batch_fingerprint != batch_fingerprint(batch)) {
    throw ContractViolation("equilibrium state was computed for a different stack or batch");
  }
  return pc_report_from(stack, batch, eq, forward(stack, batch.inputs), partials(stack), rescaling);
}

UpdateReport pc_gradients(const WeightStack& stack, const Batch& batch,
                          const RescalingConfig& rescaling) {
  check_batch(stack, batch);
  const ForwardPass fwd = forward(stack, batch.inputs);
  const auto ps = partials(stack);
  return pc_report_from(stack, batch, equilibrium_from(stack, batch, fwd, ps), fwd, ps, rescaling);
}

UpdateReport compute_update(Rule rule, const WeightStack& stack, const Batch& batch,
                            const RescalingConfig& rescaling) {
  return rule == Rule::BP ? bp_gradients(stack, batch, rescaling)
                          : pc_gradients(stack, batch, rescaling);
}

WeightStack apply_update(const WeightStack& stack, std::span<const Matrix> deltas, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw DomainError("learning rate must be finite and >= 0");
  if (static_cast<int>(deltas.size()) != stack.depth()) {
    throw ShapeError("update holds " + std::to_string(deltas.size()) + " deltas for " +
                     std::to_string(stack.depth()) + " layers");
  }
  std::vector<Matrix> out;
  out.reserve(deltas.size());
  for (int l = 1; l <= stack.depth(); ++l) {
    const Matrix& d = deltas[static_cast<std::size_t>(l - 1)];
    if (d.rows() != stack.weight(l).rows() || d.cols() != stack.weight(l).cols()) {
      throw ShapeError("delta for layer " + std::to_string(l) + " does not match W_" + std::to_string(l));
    }
    out.push_back(stack.weight(l) + lr * d);
  }
  return WeightStack(std::move(out));
}

WeightStack apply_update(const WeightStack& stack, const UpdateReport& report, double lr) {
  return apply_update(stack, report.deltas, lr);
}

}  // namespace pcalign
