#include <doctest.h>

#include "mmlab/entropy.hpp"
#include "mmlab/potential.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace mmlab;

namespace {

EntropyConfig cheap(std::uint64_t seed) {
  EntropyConfig cfg;
  cfg.n = 4;
  cfg.outer.samples = 300;
  cfg.outer.burn_in = 200;
  cfg.outer.seed = seed;
  cfg.outer.enforce_band = false;
  cfg.points = 12;
  cfg.inner.samples = 100;
  cfg.inner.burn_in = 50;
  cfg.inner_min = 50;
  cfg.grid = 9;
  cfg.seed = seed + 1;
  return cfg;
}

}  // namespace

TEST_CASE("relative entropy of the GUE vanishes") {
  const auto q = entropy_g(default_model(quadratic_spec({0.0})), cheap(41));
  CHECK(q.kind == "h_g");
  CHECK(q.grid.size() == 9);
  CHECK(std::abs(q.value) <= q.budget);
  CHECK(q.tail_low <= q.tail_high);
}

TEST_CASE("entropy of a shifted Gaussian") {
  const auto q = entropy(default_model(quadratic_spec({1.0})), cheap(42));
  const double ref = 0.5 * std::log(2 * std::numbers::pi * std::numbers::e);
  CHECK(std::abs(q.value - ref) <= q.budget);
  const double hg = gaussian_relative(q.value, q.second_moment, 1);
  CHECK(hg == doctest::Approx(q.value - 0.5 * q.second_moment - 0.5 * std::log(2 * std::numbers::pi)));
}

TEST_CASE("Fisher information scales like s^-2") {
  const auto V = quartic_spec(0.1, 2.0);
  SamplerConfig sc;
  sc.samples = 100;
  sc.burn_in = 100;
  sc.enforce_band = false;
  const auto chain = sample(V, 4, sc);
  for (double s : {0.5, 2.0}) {
    const auto r = fisher_scaling_check(V, chain, s);
    CHECK(r.pass);
    CHECK(r.max_relative_defect < 1e-10);
  }
}

TEST_CASE("Fisher sandwich for the coupled Gaussian") {
  const auto r = fisher_sandwich_check(default_model(coupled_gaussian_spec(0.5)), {0.0, 1.0, 10.0}, cheap(43));
  CHECK(r.rows.size() == 3);
  CHECK(r.pass);
}

TEST_CASE("grid output") {
  auto cfg = cheap(44);
  cfg.grid = 5;
  const auto q = entropy_g(default_model(quadratic_spec({0.0})), cfg);
  std::ostringstream os;
  write_grid_csv(q, os);
  int lines = 0;
  for (char ch : os.str()) lines += ch == '\n';
  CHECK(lines == 6);
  CHECK(to_json(q).find("\"budget\"") != std::string::npos);
}

TEST_CASE("grid validation") {
  auto cfg = cheap(45);
  cfg.grid = 8;
  CHECK_THROWS(entropy(default_model(quadratic_spec({0.0})), cfg));
  cfg.grid = 9;
  cfg.s_max = -1;
  CHECK_THROWS(entropy(default_model(quadratic_spec({0.0})), cfg));
}
