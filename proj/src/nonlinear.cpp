#include "pcalign/nonlinear.hpp"

#include "pcalign/errors.hpp"

#include <cmath>
#include <string>

namespace pcalign {

namespace {

void check_batch(const NonlinearNet& net, const Batch& batch) {
  if (batch.inputs.cols() < 1) throw ShapeError("batch must hold at least one sample");
  if (batch.inputs.rows() != net.weights.input_dim() || batch.targets.rows() != net.weights.output_dim()) {
    throw ShapeError("batch shape does not match the network's input/output widths");
  }
  if (batch.targets.cols() != batch.inputs.cols()) {
    throw ShapeError("batch inputs and targets hold different sample counts");
  }
}

double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

/// Prediction errors e_l = x_l - act_l(W_l x_{l-1}) and the local slopes act'_l(a_l).
struct LocalTerms {
  std::vector<Matrix> errors;
  std::vector<Matrix> slopes;
  double energy = 0.0;
};

LocalTerms local_terms(const NonlinearNet& net, std::span<const Matrix> x) {
  LocalTerms t;
  const int depth = net.weights.depth();
  t.errors.reserve(static_cast<std::size_t>(depth));
  t.slopes.reserve(static_cast<std::size_t>(depth));
  for (int l = 1; l <= depth; ++l) {
    const auto idx = static_cast<std::size_t>(l);
    const Matrix a = net.weights.weight(l) * x[idx - 1];
    t.errors.push_back(x[idx] - activate(net.activation(l), a));
    t.slopes.push_back(activate_derivative(net.activation(l), a));
    t.energy += t.errors.back().squaredNorm();
  }
  t.energy *= 0.5 / static_cast<double>(x.front().cols());
  return t;
}

UpdateReport finish(const NonlinearNet& net, const NlForward& fwd, UpdateReport report,
                    std::span<const Matrix> post, const RescalingConfig& rescaling) {
  report.rescaling = rescaling.mode;
  rescale_deltas(report.deltas, post, fwd.post, rescaling);
  report.predicted_dydt = nl_prediction_change(net, fwd, report.deltas);
  report.ta_per_sample = target_alignment_columns(report.residual, report.predicted_dydt);
  return report;
}

}  // namespace

Matrix activate(Activation act, const Matrix& pre) {
  switch (act) {
    case Activation::Identity:
      return pre;
    case Activation::ReLU:
      return pre.cwiseMax(0.0);
    case Activation::Sigmoid:
      return pre.unaryExpr([](double v) { return sigmoid(v); });
  }
  return pre;
}

Matrix activate_derivative(Activation act, const Matrix& pre) {
  switch (act) {
    case Activation::Identity:
      return Matrix::Ones(pre.rows(), pre.cols());
    case Activation::ReLU:
      return pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::Sigmoid:
      return pre.unaryExpr([](double v) {
        const double s = sigmoid(v);
        return s * (1.0 - s);
      });
  }
  return Matrix::Ones(pre.rows(), pre.cols());
}

NlForward nl_forward(const NonlinearNet& net, const Matrix& inputs) {
  if (inputs.rows() != net.weights.input_dim()) {
    throw ShapeError("input has " + std::to_string(inputs.rows()) + " rows, layer 1 expects " +
                     std::to_string(net.weights.input_dim()));
  }
  NlForward fwd;
  const int depth = net.weights.depth();
  fwd.pre.reserve(static_cast<std::size_t>(depth));
  fwd.post.reserve(static_cast<std::size_t>(depth) + 1);
  fwd.post.push_back(inputs);
  for (int l = 1; l <= depth; ++l) {
    fwd.pre.push_back(net.weights.weight(l) * fwd.post.back());
    fwd.post.push_back(activate(net.activation(l), fwd.pre.back()));
  }
  return fwd;
}

double nl_loss(const NonlinearNet& net, const Batch& batch) {
  check_batch(net, batch);
  const NlForward fwd = nl_forward(net, batch.inputs);
  return 0.5 * (batch.targets - fwd.prediction()).squaredNorm() / static_cast<double>(batch.size());
}

Matrix nl_prediction_change(const NonlinearNet& net, const NlForward& fwd,
                            std::span<const Matrix> deltas) {
  if (static_cast<int>(deltas.size()) != net.weights.depth()) {
    throw ShapeError("prediction change needs one delta per layer");
  }
  Matrix tangent = Matrix::Zero(fwd.post.front().rows(), fwd.post.front().cols());
  for (int l = 1; l <= net.weights.depth(); ++l) {
    const auto idx = static_cast<std::size_t>(l - 1);
    const Matrix da = deltas[idx] * fwd.post[idx] + net.weights.weight(l) * tangent;
    tangent = activate_derivative(net.activation(l), fwd.pre[idx]).cwiseProduct(da);
  }
  return tangent;
}

UpdateReport nl_bp_report(const NonlinearNet& net, const Batch& batch,
                          const RescalingConfig& rescaling) {
  check_batch(net, batch);
  const NlForward fwd = nl_forward(net, batch.inputs);
  const int depth = net.weights.depth();
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  UpdateReport report;
  report.rule = Rule::BP;
  report.residual = batch.targets - fwd.prediction();
  report.deltas.resize(static_cast<std::size_t>(depth));
  Matrix delta = activate_derivative(net.activation(depth), fwd.pre.back()).cwiseProduct(report.residual);
  for (int l = depth; l >= 1; --l) {
    const auto idx = static_cast<std::size_t>(l - 1);
    report.deltas[idx] = inv_b * delta * fwd.post[idx].transpose();
    if (l > 1) {
      delta = activate_derivative(net.activation(l - 1), fwd.pre[idx - 1])
                  .cwiseProduct(net.weights.weight(l).transpose() * delta);
    }
  }
  return finish(net, fwd, std::move(report), fwd.post, rescaling);
}

NonlinearNet nl_bp_step(const NonlinearNet& net, const Batch& batch, double lr) {
  return apply_update(net, nl_bp_report(net, batch), lr);
}

void InferenceConfig::validate() const {
  std::vector<std::string> bad;
  if (max_steps < 0) bad.push_back("inference.max_steps: must be >= 0");
  if (!(step_size > 0.0) || !std::isfinite(step_size)) bad.push_back("inference.step_size: must be > 0");
  if (!(early_stop_grad_norm >= 0.0)) bad.push_back("inference.early_stop_grad_norm: must be >= 0");
  if (divergence_patience < 1) bad.push_back("inference.divergence_patience: must be >= 1");
  if (!bad.empty()) throw ValidationError(bad);
}

double nl_energy(const NonlinearNet& net, std::span<const Matrix> activities) {
  if (static_cast<int>(activities.size()) != net.weights.depth() + 1) {
    throw ShapeError("energy needs L + 1 activity matrices");
  }
  return local_terms(net, activities).energy;
}

InferenceResult nl_pc_infer(const NonlinearNet& net, const Batch& batch, const InferenceConfig& cfg) {
  cfg.validate();
  check_batch(net, batch);
  const int depth = net.weights.depth();

  InferenceResult res;
  res.activities = nl_forward(net, batch.inputs).post;
  res.activities.back() = batch.targets;

  LocalTerms terms = local_terms(net, res.activities);
  res.energy = terms.energy;
  if (cfg.record_energy) res.energy_trace.push_back(res.energy);

  auto gradient_norm = [&](const LocalTerms& t) {
    double sq = 0.0;
    for (int l = 1; l < depth; ++l) {
      const auto idx = static_cast<std::size_t>(l);
      const Matrix g = t.errors[idx - 1] -
                       net.weights.weight(l + 1).transpose() * t.slopes[idx].cwiseProduct(t.errors[idx]);
      sq += g.squaredNorm();
    }
    return std::sqrt(sq);
  };

  int rising = 0;
  for (int step = 0; step < cfg.max_steps; ++step) {
    if (cfg.early_stop_grad_norm > 0.0 && gradient_norm(terms) < cfg.early_stop_grad_norm) break;
    // dE/dx_l = e_l - W_{l+1}^T (act'(a_{l+1}) * e_{l+1}), per sample.
    for (int l = 1; l < depth; ++l) {
      const auto idx = static_cast<std::size_t>(l);
      res.activities[idx] -=
          cfg.step_size * (terms.errors[idx - 1] - net.weights.weight(l + 1).transpose() *
                                                       terms.slopes[idx].cwiseProduct(terms.errors[idx]));
    }
    terms = local_terms(net, res.activities);
    res.steps = step + 1;
    if (!std::isfinite(terms.energy)) {
      throw InferenceDiverged("energy became non-finite at inference step " + std::to_string(step + 1));
    }
    rising = terms.energy > res.energy ? rising + 1 : 0;
    res.energy = terms.energy;
    if (cfg.record_energy) res.energy_trace.push_back(res.energy);
    if (rising >= cfg.divergence_patience) {
      throw InferenceDiverged("energy rose for " + std::to_string(rising) +
                              " consecutive inference steps (step " + std::to_string(step + 1) + ")");
    }
  }
  res.grad_norm = gradient_norm(terms);
  return res;
}

UpdateReport nl_pc_report(const NonlinearNet& net, const Batch& batch,
                          std::span<const Matrix> equilibrium, const RescalingConfig& rescaling) {
  check_batch(net, batch);
  const int depth = net.weights.depth();
  if (static_cast<int>(equilibrium.size()) != depth + 1) {
    throw ShapeError("equilibrium must hold L + 1 activity matrices");
  }
  for (int l = 0; l <= depth; ++l) {
    const Matrix& x = equilibrium[static_cast<std::size_t>(l)];
    const int rows = l == 0 ? net.weights.input_dim() : static_cast<int>(net.weights.weight(l).rows());
    if (x.rows() != rows || x.cols() != batch.inputs.cols()) {
      throw ShapeError("equilibrium activity " + std::to_string(l) + " has the wrong shape");
    }
  }
  const NlForward fwd = nl_forward(net, batch.inputs);
  const LocalTerms terms = local_terms(net, equilibrium);
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  UpdateReport report;
  report.rule = Rule::PC;
  report.residual = batch.targets - fwd.prediction();
  for (int l = 1; l <= depth; ++l) {
    const auto idx = static_cast<std::size_t>(l - 1);
    report.deltas.push_back(inv_b * terms.slopes[idx].cwiseProduct(terms.errors[idx]) *
                            equilibrium[idx].transpose());
  }
  return finish(net, fwd, std::move(report), equilibrium, rescaling);
}

NonlinearNet nl_pc_step(const NonlinearNet& net, const Batch& batch,
                        std::span<const Matrix> equilibrium, double lr,
                        const RescalingConfig& rescaling) {
  return apply_update(net, nl_pc_report(net, batch, equilibrium, rescaling), lr);
}

NonlinearNet apply_update(const NonlinearNet& net, const UpdateReport& report, double lr) {
  NonlinearNet out = net;
  out.weights = apply_update(net.weights, report.deltas, lr);
  return out;
}

}  // namespace pcalign
