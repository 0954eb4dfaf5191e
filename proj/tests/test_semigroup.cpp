#include <doctest.h>

#include "mmlab/potential.hpp"
#include "mmlab/semigroup.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace mmlab;
using namespace mmlab::testing;

TEST_CASE("Q_t of a quadratic has the closed form") {
  Rng rng(21);
  const auto x = random_tuple(rng, 1, 4);
  for (double t : {0.1, 1.0, 5.0}) {
    QtConfig qc;
    qc.tol = 1e-13;
    const auto r = inf_convolve(quadratic_spec({0.0}), t, x, MatrixTuple{}, qc);
    CHECK(r.value == doctest::Approx(norm2_squared(x) / (2 * (1 + t))).epsilon(1e-10));
    CHECK(norm2(r.minimizer - (1 / (1 + t)) * x) < 1e-10);
  }
}

TEST_CASE("Q_t damping rule") {
  CHECK(qt_damping(0.5, 1, 1) == 1.0);
  CHECK(qt_damping(2.0, 1, 1) == 0.5);
  CHECK(qt_damping(4.0, 1, 2) == doctest::Approx(2.0 / 14.0));
}

TEST_CASE("Q_t of a coupled Gaussian converges and is a minimum") {
  Rng rng(22);
  const auto V = coupled_gaussian_spec(0.6);
  const auto x = random_tuple(rng, 1, 3);
  const auto y = random_tuple(rng, 1, 3);
  const double t = 2.0;
  const auto r = inf_convolve(V, t, x, y);
  CHECK(r.residual < 1e-8);
  const auto objective = [&](const MatrixTuple& z) {
    return V.potential.value(concat(z, y)) + norm2_squared(z - x) / (2 * t);
  };
  const double best = objective(r.minimizer);
  CHECK(best == doctest::Approx(r.value).epsilon(1e-9));
  for (int k = 0; k < 5; ++k) {
    auto z = r.minimizer;
    z.axpy(0.05, random_tuple(rng, 1, 3));
    CHECK(objective(z) >= best);
  }
}

TEST_CASE("Gaussian smoothing of a quadratic") {
  Rng rng(23);
  const auto x = random_tuple(rng, 1, 4);
  auto f = [](const MatrixTuple& z) { return norm2_squared(z); };
  const auto e = gaussian_smooth(f, x, 0.5, 400, 3);
  CHECK(std::abs(e.mean - (norm2_squared(x) + 0.5)) <= 5 * e.se + 1e-12);
}

TEST_CASE("Trotter product for a quadratic") {
  Rng rng(24);
  const auto x = random_tuple(rng, 1, 3);
  TrotterConfig cfg;
  cfg.outer_samples = 64;
  const auto r = trotter_R(quadratic_spec({0.0}), 0.5, 2, x, MatrixTuple{}, cfg);
  CHECK(r.steps == 2);
  CHECK(norm2(r.grad - (1 / 1.5) * x) < 1e-8);
  CHECK(r.grad_bound > 0);
}

TEST_CASE("evolved gradient of the GUE") {
  Rng rng(25);
  const auto x = random_tuple(rng, 1, 3);
  const auto ep = evolved(quadratic_spec({0.0}));
  const double t = 0.75;
  const auto g = evolved_grad(ep, t, x, MatrixTuple{}, 5);
  CHECK(norm2(g.grad - (1 / (1 + t)) * x) <= 5 * g.se + 1e-12);
  const auto ren = evolved(quadratic_spec({0.0}), TimeMode::Renormalized);
  const auto h = evolved_grad(ren, t, x, MatrixTuple{}, 6);
  CHECK(norm2(h.grad - x) <= 5 * h.se + 1e-12);
}

TEST_CASE("a priori bounds shrink with the level") {
  CHECK(trotter_grad_bound(2, 1, 1, 4) < trotter_grad_bound(2, 1, 1, 3));
  CHECK(trotter_value_bound(2, 1, 1, 4, 1) < trotter_value_bound(2, 1, 1, 3, 1));
}
