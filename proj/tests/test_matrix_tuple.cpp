#include <doctest.h>

#include "mmlab/matrix_tuple.hpp"
#include "test_support.hpp"

using namespace mmlab;
using namespace mmlab::testing;

TEST_CASE("normalized trace and inner product") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2;
  CHECK(tau(a) == Complex(1.0));
  MatrixTuple x({a});
  CHECK(norm2_squared(x) == doctest::Approx(2.0));
  CHECK(inner(x, x) == doctest::Approx(2.0));
  MatrixTuple id = MatrixTuple::scalars({1.0, 3.0}, 4);
  CHECK(norm2_squared(id) == doctest::Approx(10.0));
}

TEST_CASE("inner product is real, symmetric and matches the entrywise sum") {
  Rng rng(3);
  auto x = random_tuple(rng, 3, 5), y = random_tuple(rng, 3, 5);
  double direct = 0;
  for (int j = 0; j < 3; ++j) direct += (x[j].adjoint() * y[j]).trace().real() / 5.0;
  CHECK(inner(x, y) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(inner(x, y) == doctest::Approx(inner(y, x)).epsilon(1e-12));
}

TEST_CASE("operator norm is the largest absolute eigenvalue") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = -4;
  a(1, 1) = 2;
  a(2, 2) = 1;
  CHECK(opnorm(MatrixTuple({a})) == doctest::Approx(4.0));
}

TEST_CASE("block helpers") {
  Rng rng(5);
  auto x = random_tuple(rng, 4, 3);
  auto part = select(x, {2, 0});
  CHECK(part.size() == 2);
  CHECK((part[0] - x[2]).norm() == 0);
  MatrixTuple z(4, 3);
  scatter(z, {2, 0}, part);
  CHECK((z[2] - x[2]).norm() == 0);
  CHECK((z[0] - x[0]).norm() == 0);
  CHECK(z[1].norm() == 0);
  auto c = concat(slice(x, 0, 1), slice(x, 1, 3));
  CHECK(norm2(c - x) == 0);
  CHECK(concat(MatrixTuple(), x).size() == 4);
}

TEST_CASE("mix applies the coefficient matrix to the variable index") {
  Rng rng(7);
  auto x = random_tuple(rng, 2, 3);
  Eigen::MatrixXd A(2, 2);
  A << 1, 1, -1, 1;
  auto y = mix(A, x);
  CHECK(norm2(MatrixTuple({y[0] - x[0] - x[1]})) < 1e-14);
  CHECK(norm2(MatrixTuple({y[1] - x[1] + x[0]})) < 1e-14);
  CHECK_THROWS_AS(mix(Eigen::MatrixXd::Identity(3, 3), x), std::invalid_argument);
}

TEST_CASE("shape mismatches throw") {
  MatrixTuple a(2, 3), b(2, 4), c(1, 3);
  CHECK_THROWS_AS(a += b, std::invalid_argument);
  CHECK_THROWS_AS(inner(a, c), std::invalid_argument);
  std::vector<Matrix> bad = {Matrix::Zero(2, 2), Matrix::Zero(3, 3)};
  CHECK_THROWS_AS(MatrixTuple{bad}, std::invalid_argument);
}

TEST_CASE("hermitize removes the anti-Hermitian part") {
  Matrix a(2, 2);
  a << Complex(1, 0), Complex(2, 1), Complex(0, 0), Complex(3, 0);
  MatrixTuple x({a});
  CHECK(hermiticity_defect(x) > 1);
  hermitize(x);
  CHECK(hermiticity_defect(x) == 0);
  CHECK(x[0](0, 1) == Complex(1, 0.5));
}

TEST_CASE("GUE normalization E tau(S^2) = variance") {
  Rng rng(9);
  double s = 0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) s += norm2_squared(gue_tuple(rng, 1, 6, 2.0));
  CHECK(s / reps == doctest::Approx(2.0).epsilon(0.02));
  Matrix g = gue(rng, 5);
  CHECK((g - g.adjoint()).norm() == 0);
}

TEST_CASE("derived seeds are deterministic and distinct") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}
