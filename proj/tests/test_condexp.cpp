#include <doctest.h>

#include "mmlab/condexp.hpp"
#include "mmlab/potential.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace mmlab;
using namespace mmlab::testing;

TEST_CASE("flow of a coupled Gaussian") {
  Rng rng(31);
  const double lambda = 0.5;
  const auto V = coupled_gaussian_spec(lambda);
  const auto x = random_tuple(rng, 1, 3);
  const auto y = random_tuple(rng, 1, 3);
  const double t = 1.7;
  OdeConfig fine;
  fine.step_factor = 0.05;
  const auto r = flow_W(V, x, y, t, fine);
  const auto exact = std::exp(-t / 2) * (x + lambda * y) - lambda * y;
  CHECK(norm2(r.w - exact) < 1e-8);
  CHECK(r.t == doctest::Approx(t));

  const auto g = flow_W(quadratic_spec({0.0}), x, MatrixTuple{}, t, fine);
  CHECK(norm2(g.w - std::exp(-t / 2) * x) < 1e-8);
}

TEST_CASE("flow contracts at rate c/2") {
  Rng rng(32);
  const auto V = quartic_spec(0.1, 2.0);
  const auto x = random_tuple(rng, 1, 4, 0.5);
  const auto xp = random_tuple(rng, 1, 4, 0.5);
  const double r = flow_contraction_ratio(V, x, xp, MatrixTuple{}, 2.0);
  CHECK(r <= 1 + 1e-8);
  CHECK(r > 0);
}

TEST_CASE("convergence envelope decreases in time") {
  double prev = semigroup_envelope(0.5, 1.5, 1, 1, 1);
  for (double t = 2; t <= 64; t *= 2) {
    const double e = semigroup_envelope(0.5, 1.5, t, 1, 1);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(Tt_discretization_bound(coupled_gaussian_spec(0.5), 5, 1) <
        Tt_discretization_bound(coupled_gaussian_spec(0.5), 4, 1));
}

TEST_CASE("T_t of the identity on the GUE decays to zero") {
  Rng rng(33);
  const auto x = random_tuple(rng, 1, 3);
  TtConfig cfg;
  cfg.paths = 256;
  const auto r = Tt_apply(x_block(), 1, quadratic_spec({0.0}), x, MatrixTuple{}, 2.0, 3, cfg);
  CHECK(norm2(r.mean - std::exp(-1.0) * x) <= 5 * r.se + 0.05);
}

TEST_CASE("direct conditional expectation of a coupled Gaussian") {
  Rng rng(34);
  const double lambda = 0.5;
  const auto V = coupled_gaussian_spec(lambda);
  const auto y = random_tuple(rng, 1, 4);
  CondExpConfig cfg;
  cfg.sampler.samples = 800;
  cfg.sampler.burn_in = 200;
  cfg.sampler.seed = 35;
  const auto r = cond_exp(x_block(), V, y, CondMode::Direct, cfg);
  CHECK(norm2(r.estimate + lambda * y) <= 5 * r.se);
}

TEST_CASE("observables from operator trace polynomials") {
  Rng rng(36);
  const auto x = random_tuple(rng, 1, 3);
  const auto y = random_tuple(rng, 1, 3);
  const auto f = x_block();
  CHECK(norm2(f(x, y) - x) == 0.0);
  CHECK(norm2(y_block()(x, y) - y) == 0.0);
}
