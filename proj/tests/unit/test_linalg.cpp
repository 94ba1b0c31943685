#include "doctest.h"

#include "pcalign/errors.hpp"
#include "pcalign/linalg.hpp"
#include "pcalign/tasks.hpp"

using namespace pcalign;

TEST_CASE("spd_solve solves and rejects indefinite matrices") {
  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  Matrix b(2, 1);
  b << -2, 0;
  const Matrix x = spd_solve(a, b);
  CHECK(x(0, 0) == doctest::Approx(-4.0 / 3.0));
  CHECK(x(1, 0) == doctest::Approx(2.0 / 3.0));

  Matrix bad(2, 2);
  bad << 1, 0, 0, -1;
  CHECK_THROWS_AS(spd_solve(bad, b), NumericError);
}

TEST_CASE("pseudo-inverse satisfies the Penrose conditions") {
  // Rank-3 matrix of shape 7 x 5.
  const Matrix m = standard_normal(7, 3, 1) * standard_normal(3, 5, 2);
  const Matrix p = pseudo_inverse(m);
  CHECK((m * p * m - m).norm() < 1e-10);
  CHECK((p * m * p - p).norm() < 1e-10);
  CHECK(((m * p).transpose() - m * p).norm() < 1e-10);
  CHECK(((p * m).transpose() - p * m).norm() < 1e-10);
}

TEST_CASE("singular values sorted descending, both SVD routes agree") {
  const Matrix small = standard_normal(6, 4, 3);
  const Vector s = singular_values(small);
  for (int i = 1; i < s.size(); ++i) CHECK(s(i) <= s(i - 1));
  const Matrix big = standard_normal(40, 30, 4);
  const Vector jac = Eigen::JacobiSVD<Matrix>(big).singularValues();
  CHECK((singular_values(big) - jac).norm() < 1e-10);
}

TEST_CASE("symmetric eigen range") {
  Matrix m(2, 2);
  m << 3, 1, 1, 3;
  const auto r = symmetric_eigen_range(m);
  CHECK(r.min == doctest::Approx(2.0));
  CHECK(r.max == doctest::Approx(4.0));
}

TEST_CASE("fingerprint tracks content and shape") {
  const Matrix a = standard_normal(3, 4, 5);
  Matrix b = a;
  CHECK(fingerprint(a) == fingerprint(b));
  b(1, 1) += 1e-15;
  CHECK(fingerprint(a) != fingerprint(b));
  const Matrix c = a.reshaped(4, 3);
  CHECK(fingerprint(a) != fingerprint(c));
}
