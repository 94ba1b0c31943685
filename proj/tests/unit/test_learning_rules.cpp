#include "doctest.h"

#include "../oracles.hpp"
#include "pcalign/errors.hpp"
#include "pcalign/learning_rules.hpp"
#include "pcalign/tasks.hpp"

#include <cmath>

using namespace pcalign;

namespace {

WeightStack toy_stack() { return WeightStack({Matrix::Ones(1, 1), Matrix::Ones(2, 1)}); }

Batch toy_batch() {
  Batch b{Matrix::Ones(1, 1), Matrix(2, 1)};
  b.targets << -1.0, 1.0;
  return b;
}

WeightStack random_stack(std::vector<int> dims, std::uint64_t seed, std::optional<double> kappa = {}) {
  return initialize(NetworkSpec(std::move(dims)), {InitKind::NormPreservingNormal, seed, kappa});
}

std::vector<Matrix> as_vector(const WeightStack& s) { return {s.weights().begin(), s.weights().end()}; }

RescalingConfig with_mode(Rescaling mode) {
  RescalingConfig c;
  c.mode = mode;
  return c;
}

double max_rel(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

}  // namespace

TEST_CASE("toy network: S, equilibrium and alignment") {
  const auto stack = toy_stack();
  const auto batch = toy_batch();

  Matrix s_expected(2, 2);
  s_expected << 2, 1, 1, 2;
  CHECK((s_matrix(stack) - s_expected).norm() < 1e-15);

  const auto eq = pc_equilibrium(stack, batch);
  CHECK(eq.activity(1)(0, 0) == doctest::Approx(oracle::toy::kX1).epsilon(1e-12));
  CHECK(eq.output_error()(0, 0) == doctest::Approx(oracle::toy::kEps2[0]).epsilon(1e-12));
  CHECK(eq.output_error()(1, 0) == doctest::Approx(oracle::toy::kEps2[1]).epsilon(1e-12));

  const auto bp = bp_gradients(stack, batch);
  CHECK(bp.predicted_dydt(0, 0) == doctest::Approx(oracle::toy::kBpDydt[0]));
  CHECK(bp.predicted_dydt(1, 0) == doctest::Approx(oracle::toy::kBpDydt[1]));
  CHECK(bp.mean_ta() == doctest::Approx(oracle::toy::kTaBp).epsilon(1e-9));

  const auto pc = pc_gradients(stack, batch);
  CHECK(pc.predicted_dydt(0, 0) == doctest::Approx(oracle::toy::kPcDydt[0]));
  CHECK(pc.predicted_dydt(1, 0) == doctest::Approx(oracle::toy::kPcDydt[1]));
  CHECK(pc.mean_ta() == doctest::Approx(oracle::toy::kTaPc).epsilon(1e-9));

  const auto alpha = adaptive_lr_factors(eq, stack, batch);
  CHECK(alpha[0] == doctest::Approx(oracle::toy::kAlpha[0]));
  CHECK(alpha[1] == doctest::Approx(oracle::toy::kAlpha[1]));

  const auto scaled = pc_gradients(stack, batch, with_mode(Rescaling::AdaptiveLR));
  CHECK((scaled.predicted_dydt - scaled.residual).norm() < 1e-12);
  CHECK(scaled.mean_ta() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equilibrium invariants on random nets") {
  const auto stack = random_stack({6, 9, 7, 5}, 3);
  const Batch batch = random_regression_batch(6, 5, 4, 8);
  const auto eq = pc_equilibrium(stack, batch);
  CHECK(eq.activity(0) == batch.inputs);
  CHECK(eq.activity(3) == batch.targets);
  // eps_l = x_l - W_l x_{l-1} and eps_l = W_{l+1}^T eps_{l+1}.
  for (int l = 1; l <= 3; ++l) {
    CHECK((eq.error(l) - (eq.activity(l) - stack.weight(l) * eq.activity(l - 1))).norm() < 1e-10);
  }
  for (int l = 1; l < 3; ++l) {
    CHECK((eq.error(l) - stack.weight(l + 1).transpose() * eq.error(l + 1)).norm() < 1e-12);
  }
  // r = S eps_L.
  const Matrix r = batch.targets - composite(stack) * batch.inputs;
  CHECK((eq.s * eq.output_error() - r).norm() < 1e-10);
  // Energy at equilibrium equals 1/2 r^T S^{-1} r.
  CHECK(pc_energy(stack, eq.activities) == doctest::Approx(equilibrated_energy(stack, batch)).epsilon(1e-10));
}

TEST_CASE("S is symmetric positive definite with eigenvalues >= 1") {
  const auto stack = random_stack({5, 8, 8, 8, 5}, 4);
  const Matrix s = s_matrix(stack);
  CHECK((s - s.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  CHECK(es.eigenvalues().minCoeff() >= 1.0 - 1e-12);
}

TEST_CASE("zero residual gives zero updates and undefined alignment") {
  const auto stack = random_stack({4, 6, 3}, 5);
  Batch batch;
  batch.inputs = standard_normal(4, 2, 1);
  batch.targets = composite(stack) * batch.inputs;
  const auto eq = pc_equilibrium(stack, batch);
  const auto fwd = forward(stack, batch.inputs);
  CHECK((eq.activity(1) - fwd.at(1)).norm() < 1e-12);
  for (Rule rule : {Rule::BP, Rule::PC}) {
    const auto rep = compute_update(rule, stack, batch);
    for (const auto& d : rep.deltas) CHECK(d.norm() < 1e-12);
    for (const auto& t : rep.ta_per_sample) CHECK(!t.defined());
  }
  // With post = pre the adaptive factor is 1/||x̂||^2.
  const auto alpha = adaptive_lr_factors(eq, stack, batch);
  CHECK(alpha[1] == doctest::Approx(2.0 / fwd.at(1).squaredNorm()).epsilon(1e-10));
}

TEST_CASE("BP deltas match finite differences of the loss") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto stack = random_stack({3, 5, 4, 2}, seed);
    const Batch batch = random_regression_batch(3, 2, 3, seed + 100);
    const auto rep = bp_gradients(stack, batch);
    auto loss = [&](const std::vector<Matrix>& ws) { return oracle::bp_loss(ws, batch.inputs, batch.targets); };
    for (std::size_t l = 0; l < 3; ++l) {
      const Matrix fd = -oracle::fd_gradient(loss, as_vector(stack), l);
      CHECK(max_rel(rep.deltas[l], fd) < 1e-6);
    }
  }
}

TEST_CASE("PC deltas match finite differences of the equilibrated energy") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto stack = random_stack({3, 4, 4, 2}, seed);
    const Batch batch = random_regression_batch(3, 2, 2, seed + 7);
    const auto rep = pc_gradients(stack, batch);
    auto energy = [&](const std::vector<Matrix>& ws) {
      return equilibrated_energy(WeightStack(ws), batch);
    };
    for (std::size_t l = 0; l < 3; ++l) {
      const Matrix fd = -oracle::fd_gradient(energy, as_vector(stack), l);
      CHECK(max_rel(rep.deltas[l], fd) < 1e-6);
    }
  }
}

TEST_CASE("analytic equilibrium matches iterative descent") {
  const auto stack = random_stack({4, 5, 5, 3}, 12);
  const Batch batch = random_regression_batch(4, 3, 2, 2);
  const auto eq = pc_equilibrium(stack, batch);
  const auto it = oracle::descend_linear_energy(as_vector(stack), batch.inputs, batch.targets, 10000, 0.1);
  for (int l = 1; l < 3; ++l) CHECK((eq.activity(l) - it[static_cast<std::size_t>(l)]).norm() < 1e-9);
}

TEST_CASE("adaptive rates give exact alignment for a single sample") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int depth = 1 + static_cast<int>(seed % 6);
    std::vector<int> dims{7};
    for (int h = 0; h < depth; ++h) dims.push_back(6 + static_cast<int>(seed + h) % 5);
    dims.push_back(5);
    const auto stack = random_stack(dims, seed, seed % 2 ? std::optional<double>(1e4) : std::nullopt);
    const Batch batch = random_regression_batch(7, 5, 1, seed);
    const auto rep = pc_gradients(stack, batch, with_mode(Rescaling::AdaptiveLR));
    CHECK(rep.mean_ta() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(max_rel(rep.predicted_dydt, rep.residual) < 1e-8);
  }
}

TEST_CASE("constant activity overlap collapses PC to the residual") {
  // W1 = 2, W2 = 1, x = 1, y = -1: x*_0 x̂_0 = x*_1 x̂_1 = 1, so the plain update is r.
  const WeightStack stack({Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.0)});
  Batch batch{Matrix::Ones(1, 1), Matrix::Constant(1, 1, -1.0)};
  const auto rep = pc_gradients(stack, batch);
  CHECK(rep.predicted_dydt(0, 0) == doctest::Approx(-3.0));
  CHECK(rep.residual(0, 0) == doctest::Approx(-3.0));
}

TEST_CASE("ExcludeLast leaves the top layer unscaled") {
  const auto stack = random_stack({4, 5, 5, 3}, 1);
  const Batch batch = random_regression_batch(4, 3, 1, 1);
  const auto eq = pc_equilibrium(stack, batch);
  const auto all = adaptive_lr_factors(eq, stack, batch);
  const auto excl = adaptive_lr_factors(eq, stack, batch, 1e-12, AdaptiveLayers::ExcludeLast);
  CHECK(excl[0] == all[0]);
  CHECK(excl[1] == all[1]);
  CHECK(excl[2] == 1.0);
}

TEST_CASE("degenerate activities are reported") {
  const auto stack = random_stack({3, 4, 2}, 1);
  Batch batch{Matrix::Zero(3, 1), Matrix::Ones(2, 1)};
  CHECK_THROWS_AS(pc_gradients(stack, batch, with_mode(Rescaling::AdaptiveLR)), DegenerateActivity);
}

TEST_CASE("stale equilibrium is a contract violation") {
  const auto stack = random_stack({3, 4, 2}, 1);
  const Batch batch = random_regression_batch(3, 2, 2, 1);
  const auto eq = pc_equilibrium(stack, batch);
  const auto other = random_stack({3, 4, 2}, 2);
  CHECK_THROWS_AS(pc_gradients(other, batch, eq), ContractViolation);
  const Batch moved = random_regression_batch(3, 2, 2, 2);
  CHECK_THROWS_AS(pc_gradients(stack, moved, eq), ContractViolation);
  CHECK_NOTHROW(pc_gradients(stack, batch, eq));
}

TEST_CASE("shape mismatches are rejected") {
  const auto stack = random_stack({3, 4, 2}, 1);
  CHECK_THROWS_AS(pc_equilibrium(stack, random_regression_batch(4, 2, 1, 0)), ShapeError);
  CHECK_THROWS_AS(bp_gradients(stack, random_regression_batch(3, 3, 1, 0)), ShapeError);
}

TEST_CASE("decorrelation gives exact batch alignment when B < width") {
  RescalingConfig cfg = with_mode(Rescaling::Decorrelation);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int b = 2 << (seed % 3);
    const auto stack = random_stack({12, 16, 14, 10}, seed);
    const Batch batch = random_regression_batch(12, 10, b, seed);
    const auto rep = pc_gradients(stack, batch, cfg);
    for (const auto& t : rep.ta_per_sample) CHECK(*t.value == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(max_rel(rep.predicted_dydt, rep.residual) < 1e-8);
  }
}

TEST_CASE("decorrelation matrices: X*^T A X̂ = B I") {
  const auto stack = random_stack({10, 12, 8}, 4);
  const Batch batch = random_regression_batch(10, 8, 4, 4);
  const auto eq = pc_equilibrium(stack, batch);
  const auto fwd = forward(stack, batch.inputs);
  const auto a = decorrelation_factors(eq, stack, batch, with_mode(Rescaling::Decorrelation));
  for (int l = 1; l <= 2; ++l) {
    const Matrix g = eq.activity(l - 1).transpose() * a[static_cast<std::size_t>(l - 1)] * fwd.at(l - 1);
    CHECK((g - 4.0 * Matrix::Identity(4, 4)).norm() < 1e-8);
  }
}

TEST_CASE("literal orientation does not give exact alignment") {
  RescalingConfig cfg = with_mode(Rescaling::Decorrelation);
  cfg.orientation = DecorrelationOrientation::Literal;
  const auto stack = random_stack({12, 16, 10}, 3);
  const Batch batch = random_regression_batch(12, 10, 4, 3);
  const auto rep = pc_gradients(stack, batch, cfg);
  CHECK(rep.mean_ta() < 0.999);
}

TEST_CASE("low-rank and dense decorrelation agree") {
  const Matrix post = standard_normal(20, 5, 1);
  const Matrix pre = standard_normal(20, 5, 2);
  const Matrix g = standard_normal(7, 20, 3);
  for (auto policy : {InversePolicy::PseudoInverse, InversePolicy::SpectralRegularized}) {
    for (auto o : {DecorrelationOrientation::Transposed, DecorrelationOrientation::Literal}) {
      RescalingConfig cfg = with_mode(Rescaling::Decorrelation);
      cfg.inverse_policy = policy;
      cfg.orientation = o;
      cfg.alpha = 1e-3;
      const Matrix fast = right_decorrelate(g, post, pre, cfg, true);
      const Matrix dense = right_decorrelate(g, post, pre, cfg, false);
      CHECK(max_rel(fast, dense) < 1e-8);
      CHECK((dense - g * decorrelation_matrix(post, pre, cfg)).norm() < 1e-10 * dense.norm());
    }
  }
}

TEST_CASE("spectral floor lifts the smallest eigenvalue to alpha * lambda_max") {
  Matrix s(2, 2);
  s << 4, 0, 0, -1;
  CHECK(spectral_floor(s, 0.01) == doctest::Approx(1.04));
  Matrix pos(2, 2);
  pos << 4, 0, 0, 1;
  CHECK(spectral_floor(pos, 0.01) == 0.0);
}

TEST_CASE("regularised decorrelation stays finite for B > width") {
  RescalingConfig cfg = with_mode(Rescaling::Decorrelation);
  cfg.inverse_policy = InversePolicy::SpectralRegularized;
  const auto stack = random_stack({6, 6, 6}, 2);
  const Batch batch = random_regression_batch(6, 6, 20, 2);
  const auto rep = pc_gradients(stack, batch, cfg);
  for (const auto& d : rep.deltas) CHECK(d.allFinite());
  CHECK(rep.mean_ta() > 0.0);
}

TEST_CASE("predicted change is the first-order change of the predictions") {
  const auto stack = random_stack({5, 6, 6, 4}, 9);
  const Batch batch = random_regression_batch(5, 4, 3, 9);
  for (Rule rule : {Rule::BP, Rule::PC}) {
    const auto rep = compute_update(rule, stack, batch);
    const Matrix before = forward(stack, batch.inputs).prediction();
    double prev = 0;
    for (double lr : {1e-3, 5e-4, 2.5e-4}) {
      const Matrix after = forward(apply_update(stack, rep, lr), batch.inputs).prediction();
      const double err = ((after - before) / lr - rep.predicted_dydt).norm();
      if (prev > 0) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.05));
      prev = err;
    }
  }
}

TEST_CASE("small BP step decreases the loss; lr = 0 changes nothing") {
  const auto stack = random_stack({5, 6, 4}, 2);
  const Batch batch = random_regression_batch(5, 4, 2, 2);
  const auto rep = bp_gradients(stack, batch);
  CHECK(bp_loss(apply_update(stack, rep, 1e-4), batch) < bp_loss(stack, batch));
  CHECK(apply_update(stack, rep, 0.0) == stack);
  CHECK_THROWS_AS(apply_update(stack, rep, -1.0), DomainError);
}

TEST_CASE("rescaling config validation") {
  RescalingConfig cfg;
  cfg.inverse_policy = InversePolicy::SpectralRegularized;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
