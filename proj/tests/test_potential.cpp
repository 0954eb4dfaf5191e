#include <doctest.h>

#include "mmlab/parser.hpp"
#include "mmlab/potential.hpp"
#include "test_support.hpp"

using namespace mmlab;
using namespace mmlab::testing;

TEST_CASE("quadratic potential value and gradient") {
  Rng rng(1);
  auto V = Potential::quadratic({1.0, -2.0});
  auto x = random_tuple(rng, 2, 4);
  MatrixTuple a = MatrixTuple::scalars({1.0, -2.0}, 4);
  const double expected = 0.5 * norm2_squared(x - a) - 0.5 * norm2_squared(a);
  CHECK(V.value(x) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(norm2(V.grad(x) - (x - a)) < 1e-12);
}

TEST_CASE("trace polynomial gradient matches finite differences") {
  Rng rng(2);
  auto f = parse_potential("0.5*tr(x1^2) + 0.5*tr(x2^2) + 0.1*tr(x1^4) + 0.2*tr(x1 x2 x1 x2) + 0.3*tr(x1)*tr(x2)");
  auto V = Potential::trace_poly(f);
  for (int trial = 0; trial < 5; ++trial) {
    auto x = random_tuple(rng, 2, 3);
    auto g = V.grad(x);
    for (int j = 0; j < 2; ++j) {
      Matrix h = gue(rng, 3);
      const long double fd = fd_directional(
          [&](const BasicMatrixTuple<long double>& y) { return evaluate_scalar(f, y).real(); }, x, j, h);
      const double ip = inner(MatrixTuple({g[j]}), MatrixTuple({h}));
      CHECK(ip == doctest::Approx(double(fd)).epsilon(1e-7));
    }
  }
}

TEST_CASE("values are reported relative to the origin") {
  auto V = Potential::trace_poly(parse_potential("3 + tr(x1^2)"));
  CHECK(V.value(MatrixTuple(1, 3)) == doctest::Approx(0.0));
}

TEST_CASE("partial gradients and value_and_grad agree with grad") {
  Rng rng(4);
  auto V = Potential::trace_poly(parse_potential("0.5*tr(x1^2) + 0.5*tr(x2^2) + 0.25*tr(x1 x2)"));
  auto x = random_tuple(rng, 2, 3);
  auto full = V.grad(x);
  auto part = V.grad(x, {1});
  CHECK((part[0] - full[1]).norm() < 1e-13);
  MatrixTuple g;
  const double v = V.value_and_grad(x, {0, 1}, g);
  CHECK(v == doctest::Approx(V.value(x)));
  CHECK(norm2(g - full) < 1e-13);
}

TEST_CASE("linear image and join") {
  Rng rng(5);
  auto base = Potential::quadratic({0.0, 0.0});
  Eigen::MatrixXd A(2, 2);
  A << 2, 0, 1, 1;
  auto img = Potential::linear_image(base, A);
  auto x = random_tuple(rng, 2, 3);
  auto pre = mix(Eigen::MatrixXd(A.inverse()), x);
  CHECK(img.value(x) == doctest::Approx(base.value(pre)).epsilon(1e-12));

  auto j = Potential::join(Potential::quadratic({0.0}), Potential::quadratic({1.0}));
  CHECK(j.nvars() == 2);
  CHECK(j.value(x) == doctest::Approx(Potential::quadratic({0.0, 1.0}).value(x)).epsilon(1e-12));
}

TEST_CASE("declared windows hold on random secants") {
  WindowCheckConfig cfg;
  cfg.trials = 100;
  CHECK(hessian_window_check(quadratic_spec({0.0, 1.0}), cfg).pass);
  CHECK(hessian_window_check(quartic_spec(0.1, 2.0), cfg).pass);
  auto r = hessian_window_check(coupled_gaussian_spec(0.5), cfg);
  CHECK(r.pass);
  CHECK(r.min_ratio >= 0.5 - 1e-9);
  CHECK(r.max_ratio <= 1.5 + 1e-9);
  Eigen::MatrixXd A(2, 2);
  A << 1, 1, -1, 1;
  auto img = linear_image(quadratic_spec({0.0, 0.0}), A);
  CHECK(img.window.c == doctest::Approx(0.5));
  CHECK(img.window.C == doctest::Approx(0.5));
  CHECK(hessian_window_check(img, cfg).pass);
}

TEST_CASE("a window that is too narrow is detected") {
  auto V = make_spec(Potential::trace_poly(parse_potential("0.5*tr(x1^2) + 0.1*tr(x1^4)")), {1.0, 1.01}, 1);
  WindowCheckConfig cfg;
  cfg.scale = 2.0;
  CHECK_FALSE(hessian_window_check(V, cfg).pass);
}

TEST_CASE("spec construction errors") {
  CHECK_THROWS_AS(make_spec(Potential::quadratic({0.0}), {0.0, 1.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_spec(Potential::quadratic({0.0}), {2.0, 1.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_spec(Potential::quadratic({0.0, 0.0}), {1.0, 1.0}, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(coupled_gaussian_spec(1.0), std::invalid_argument);
}

TEST_CASE("convolution roles") {
  auto m = convolve(quadratic_spec({0.0}), quadratic_spec({1.0}));
  CHECK(m.roles.active == std::vector<int>{0});
  CHECK(m.roles.hidden == std::vector<int>{1});
  CHECK(m.spec.window.c == doctest::Approx(0.5));
}
