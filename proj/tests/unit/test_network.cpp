#include "doctest.h"

#include "../oracles.hpp"
#include "pcalign/errors.hpp"
#include "pcalign/metrics.hpp"
#include "pcalign/network.hpp"

using namespace pcalign;

TEST_CASE("forward activities and composite") {
  const auto stack = initialize(NetworkSpec({5, 7, 3, 4}), {InitKind::NormPreservingNormal, 9, {}});
  CHECK(stack.depth() == 3);
  CHECK(stack.dims() == std::vector<int>{5, 7, 3, 4});
  const Matrix x = Matrix::Random(5, 6);
  const auto fwd = forward(stack, x);
  REQUIRE(fwd.activities.size() == 4);
  CHECK(fwd.at(0) == x);
  const std::vector<Matrix> ws(stack.weights().begin(), stack.weights().end());
  CHECK((composite(stack) - oracle::composite(ws)).norm() < 1e-12);
  CHECK((fwd.prediction() - oracle::matmul(oracle::composite(ws), x)).norm() < 1e-12);
}

TEST_CASE("partials: W_{L:l+1}, identity at the top") {
  const auto stack = initialize(NetworkSpec({4, 6, 5, 3}), {InitKind::KaimingUniform, 2, {}});
  CHECK(partial(stack, 3) == Matrix::Identity(3, 3));
  const Matrix p1 = oracle::matmul(stack.weight(3), stack.weight(2));
  CHECK((partial(stack, 1) - p1).norm() < 1e-13);
  const auto ps = partials(stack);
  REQUIRE(ps.size() == 3);
  for (int l = 1; l <= 3; ++l) CHECK((ps[static_cast<std::size_t>(l - 1)] - partial(stack, l)).norm() < 1e-13);
  CHECK_THROWS_AS(partial(stack, 0), IndexError);
  CHECK_THROWS_AS(partial(stack, 4), IndexError);
}

TEST_CASE("shape errors name the layer") {
  CHECK_THROWS_AS(WeightStack({Matrix::Zero(3, 2), Matrix::Zero(4, 4)}), ShapeError);
  try {
    WeightStack({Matrix::Zero(3, 2), Matrix::Zero(4, 4)});
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find('2') != std::string::npos);
  }
  const auto stack = initialize(NetworkSpec({2, 3}), {InitKind::KaimingUniform, 1, {}});
  CHECK_THROWS_AS(forward(stack, Matrix::Zero(3, 1)), ShapeError);
  CHECK_THROWS_AS(stack.weight(2), IndexError);
}

TEST_CASE("initialisation is deterministic in the seed") {
  const NetworkSpec spec({8, 8, 8});
  const auto a = initialize(spec, {InitKind::NormPreservingNormal, 5, {}});
  const auto b = initialize(spec, {InitKind::NormPreservingNormal, 5, {}});
  const auto c = initialize(spec, {InitKind::NormPreservingNormal, 6, {}});
  CHECK(a == b);
  CHECK(!(a == c));
  CHECK(a.fingerprint() == b.fingerprint());
}

TEST_CASE("kaiming entries are bounded by sqrt(1/fan_in) with variance 1/(3n)") {
  const int n = 512;
  const Matrix w = draw_weight(InitKind::KaimingUniform, 256, n, 3);
  CHECK(w.cwiseAbs().maxCoeff() <= std::sqrt(1.0 / n));
  const double var = w.squaredNorm() / static_cast<double>(w.size());
  // SE of the mean of u^2 for u ~ U(-a, a): a^2 * sqrt(4/45) / sqrt(N).
  const double se = (1.0 / n) * std::sqrt(4.0 / 45.0) / std::sqrt(static_cast<double>(w.size()));
  CHECK(std::abs(var - 1.0 / (3.0 * n)) < 4 * se);
}

TEST_CASE("norm-preserving and LeCun variances") {
  const Matrix np = draw_weight(InitKind::NormPreservingNormal, 400, 100, 4);
  CHECK(np.squaredNorm() / np.size() == doctest::Approx(1.0 / 400).epsilon(0.02));
  const Matrix lc = draw_weight(InitKind::LeCunNormal, 400, 100, 4);
  CHECK(lc.squaredNorm() / lc.size() == doctest::Approx(1.0 / 100).epsilon(0.02));
}

TEST_CASE("set_condition_number hits the target and keeps the Frobenius norm") {
  const Matrix w = draw_weight(InitKind::KaimingUniform, 48, 32, 8);
  for (double kappa : {1.0, 2.0, 50.0, 1e4, 1e9}) {
    const Matrix c = set_condition_number(w, kappa);
    CHECK(std::abs(condition_number(c) / kappa - 1.0) < 1e-6);
    CHECK(std::abs(c.norm() - w.norm()) < 1e-9 * w.norm());
  }
}

TEST_CASE("set_condition_number keeps singular vectors") {
  const Matrix w = draw_weight(InitKind::KaimingUniform, 6, 6, 1);
  const Matrix c = set_condition_number(w, 10.0);
  Eigen::JacobiSVD<Matrix> a(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::JacobiSVD<Matrix> b(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(std::abs(a.matrixU().col(i).dot(b.matrixU().col(i))) - 1.0) < 1e-8);
  }
}

TEST_CASE("set_condition_number rejects bad targets") {
  const Matrix w = draw_weight(InitKind::KaimingUniform, 4, 4, 1);
  CHECK_THROWS_AS(set_condition_number(w, 0.5), DomainError);
  CHECK_THROWS_AS(set_condition_number(w, std::nan("")), DomainError);
  CHECK_THROWS_AS(set_condition_number(Matrix::Zero(3, 3), 2.0), DomainError);
  CHECK_THROWS_AS(set_condition_number(Matrix::Ones(1, 3), 2.0), DomainError);
  CHECK_NOTHROW(set_condition_number(Matrix::Ones(1, 3), 1.0));
}

TEST_CASE("conditioned init conditions every layer") {
  const auto stack = initialize(NetworkSpec({16, 16, 16, 16}), {InitKind::KaimingUniform, 1, 1e3});
  for (const auto& w : stack.weights()) CHECK(condition_number(w) == doctest::Approx(1e3).epsilon(1e-6));
}
