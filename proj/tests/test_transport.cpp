#include <doctest.h>

#include "mmlab/potential.hpp"
#include "mmlab/sampler.hpp"
#include "mmlab/transport.hpp"

#include <cmath>

using namespace mmlab;

namespace {

SamplerConfig chain_cfg(std::uint64_t seed) {
  SamplerConfig sc;
  sc.samples = 200;
  sc.burn_in = 200;
  sc.seed = seed;
  sc.enforce_band = false;
  return sc;
}

TransportConfig cheap_map(std::uint64_t seed) {
  TransportConfig tc;
  tc.inner.samples = 100;
  tc.inner.burn_in = 50;
  tc.inner_min = 50;
  tc.tolerance = 5e-2;
  tc.seed = seed;
  return tc;
}

}  // namespace

TEST_CASE("Lipschitz bounds") {
  const auto g = lipschitz_bounds(1, 1, kInfinity, 0);
  CHECK(g.lip == doctest::Approx(1));
  CHECK(g.deviation == 0);
  const auto b = lipschitz_bounds(0.5, 1.5, kInfinity, 0);
  CHECK(b.lip == doctest::Approx(std::pow(2.0, 3.5)));
  CHECK(b.lip_dx == doctest::Approx(std::sqrt(2.0)));
  CHECK(b.deviation == doctest::Approx(7 * std::sqrt(2.0)));
}

TEST_CASE("the map of a translated GUE removes the shift") {
  const double a = 1.0;
  const auto model = default_model(quadratic_spec({a}));
  const auto chain = sample(model.spec, 4, chain_cfg(51));
  const auto F = transport_map(model, kInfinity, 0, summarize(model, chain), cheap_map(52));
  for (const auto& x : chain.spread(2)) {
    const auto e = F(x, MatrixTuple{}, 53);
    const auto expected = x - MatrixTuple::scalars({a}, 4);
    CHECK(norm2(e.value - expected) <= e.budget);
    CHECK(e.truncation > 0);
  }
}

TEST_CASE("the GUE map is the identity") {
  const auto model = default_model(quadratic_spec({0.0}));
  const auto chain = sample(model.spec, 4, chain_cfg(54));
  const auto F = transport_map(model, kInfinity, 0, summarize(model, chain), cheap_map(55));
  const auto x = chain.spread(1).front();
  const auto e = F(x, MatrixTuple{}, 56);
  CHECK(norm2(e.value - x) <= e.budget);
}

TEST_CASE("tail bounds decrease with the truncation time") {
  const auto model = default_model(quartic_spec(0.1, 2.0));
  const auto chain = sample(model.spec, 4, chain_cfg(57));
  const auto law = summarize(model, chain);
  const auto x = chain.spread(1).front();
  const double K = 1 + 12 * 0.1 * 4;
  CHECK(forward_tail_bound(K, law, x, MatrixTuple{}, 8) < forward_tail_bound(K, law, x, MatrixTuple{}, 4));
  CHECK(reverse_tail_bound(K, law, x, MatrixTuple{}, 8) < reverse_tail_bound(K, law, x, MatrixTuple{}, 4));
  CHECK(forward_tail_bound(K, law, x, MatrixTuple{}, 4) >= 0);
}

TEST_CASE("triangular map stages depend only on earlier variables") {
  const double lambda = 0.5;
  const auto V = coupled_gaussian_spec(lambda, 2, 0);
  const auto chain = sample(V, 4, chain_cfg(58));
  const auto phi = triangular_transport(V, chain, cheap_map(59));
  REQUIRE(phi.stages.size() == 2);
  const auto x = chain.spread(1).front();
  const auto e = phi(x, 60);
  REQUIRE(e.budgets.size() == 2);
  const double e2 = norm2(MatrixTuple({e.value[1] - x[1] - lambda * x[0]}));
  CHECK(e2 <= e.budgets[1]);
  const auto audit = triangular_audit(phi, {x}, 61);
  CHECK(audit.dependency_exact);
}

TEST_CASE("tuple JSON") {
  const auto s = tuple_json(MatrixTuple::scalars({1.5}, 2));
  CHECK(s.find("\"re\"") != std::string::npos);
  CHECK(s.find("1.5") != std::string::npos);
}
