#include <doctest.h>

#include "mmlab/container.hpp"
#include "mmlab/oracles.hpp"
#include "mmlab/potential.hpp"
#include "mmlab/sampler.hpp"

#include <cmath>
#include <sstream>

using namespace mmlab;

namespace {

SamplerConfig small_config(std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.samples = 1500;
  cfg.burn_in = 300;
  cfg.chains = 4;
  cfg.seed = seed;
  return cfg;
}

double tau_power(const MatrixTuple& x, int k) {
  Matrix p = Matrix::Identity(x.dim(), x.dim());
  for (int i = 0; i < k; ++i) p = p * x[0];
  return tau(p).real();
}

}  // namespace

TEST_CASE("GUE moments at N = 4") {
  const auto chain = sample(quadratic_spec({0.0}), 4, small_config(11));
  const auto oracle = gue_even_moments(4, 2);
  CHECK(chain.mean_acceptance() >= 0.5);
  CHECK(chain.mean_acceptance() <= 0.7);
  for (int k : {1, 2}) {
    const auto e = chain.estimate([&](const MatrixTuple& x) { return tau_power(x, 2 * k); });
    CHECK(std::abs(e.mean - oracle[k]) <= 5 * e.se);
  }
  const auto odd = chain.estimate([](const MatrixTuple& x) { return tau_power(x, 1); });
  CHECK(std::abs(odd.mean) <= 5 * odd.se);
}

TEST_CASE("shifted Gaussian mean") {
  const auto chain = sample(quadratic_spec({0.7}), 4, small_config(12));
  const auto e = chain.estimate([](const MatrixTuple& x) { return tau(x[0]).real(); });
  CHECK(std::abs(e.mean - 0.7) <= 5 * e.se);
}

TEST_CASE("Schwinger-Dyson residual vanishes for the coupled Gaussian") {
  const auto V = coupled_gaussian_spec(0.4);
  const auto chain = sample(V, 4, small_config(13));
  for (const Word& p : {Word{0}, Word{1, 0, 1}}) {
    const auto r = schwinger_dyson_residual(chain, V, p, 0);
    CHECK(std::abs(r.re.mean) <= 5 * r.re.se + 1e-12);
  }
}

TEST_CASE("runs are reproducible") {
  auto cfg = small_config(14);
  cfg.samples = 50;
  cfg.burn_in = 20;
  cfg.enforce_band = false;
  const auto a = sample(quadratic_spec({0.0}), 3, cfg);
  const auto b = sample(quadratic_spec({0.0}), 3, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t c = 0; c < a.chains.size(); ++c)
    for (std::size_t i = 0; i < a.chains[c].size(); ++i) CHECK(norm2(a.chains[c][i] - b.chains[c][i]) == 0.0);
  cfg.seed = 15;
  const auto d = sample(quadratic_spec({0.0}), 3, cfg);
  CHECK(norm2(a.chains[0].back() - d.chains[0].back()) > 0.0);
}

TEST_CASE("chain container round trip") {
  auto cfg = small_config(16);
  cfg.samples = 10;
  cfg.burn_in = 10;
  cfg.enforce_band = false;
  const auto a = sample(coupled_gaussian_spec(0.2), 3, cfg);
  std::stringstream ss;
  write_chain(a, ss);
  const auto b = read_chain(ss);
  CHECK(b.n == a.n);
  CHECK(b.nvars == a.nvars);
  CHECK(b.seed == a.seed);
  REQUIRE(b.chains.size() == a.chains.size());
  for (std::size_t c = 0; c < a.chains.size(); ++c) {
    CHECK(b.acceptance[c] == a.acceptance[c]);
    for (std::size_t i = 0; i < a.chains[c].size(); ++i) CHECK(norm2(a.chains[c][i] - b.chains[c][i]) == 0.0);
  }

  std::string bytes = ss.str();
  bytes[0] = 'X';
  std::stringstream bad(bytes);
  CHECK_THROWS_AS(read_chain(bad), ContainerError);
  std::stringstream truncated(ss.str().substr(0, ss.str().size() / 2));
  CHECK_THROWS_AS(read_chain(truncated), ContainerError);
}

TEST_CASE("moment table") {
  auto cfg = small_config(17);
  cfg.samples = 200;
  cfg.enforce_band = false;
  const auto chain = sample(quadratic_spec({0.0, 0.0}), 3, cfg);
  const auto t = estimate_moments(chain, {Word{0, 0}, Word{0, 1, 0, 1}});
  REQUIRE(t.find(Word{0, 0}) != nullptr);
  CHECK(t.find(Word{1}) == nullptr);
  std::ostringstream os;
  write_csv(t, os);
  CHECK(os.str().rfind("word,", 0) == 0);
}

TEST_CASE("Herbst and operator norm concentration hold for the GUE") {
  auto cfg = small_config(18);
  cfg.samples = 1000;
  const auto chain = sample(quadratic_spec({0.0}), 6, cfg);
  auto f = [](const MatrixTuple& x) { return tau(x[0]).real(); };
  CHECK(herbst_check(chain, f, 1.0, 1.0, {0.1, 0.2}).pass);
  CHECK(opnorm_concentration_check(chain, 1.0, {0.0, 0.5}).pass);
  CHECK(theta_constant() == doctest::Approx(6 * std::sqrt(std::log(7.0)) + 9 / (6 * std::sqrt(std::log(7.0)))));
}

TEST_CASE("sampler config validation") {
  SamplerConfig cfg;
  cfg.chains = 0;
  CHECK_THROWS(validate(cfg));
  cfg = SamplerConfig{};
  cfg.step = -1;
  CHECK_THROWS(validate(cfg));
}
