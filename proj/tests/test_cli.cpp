#include <doctest.h>

#include "mmlab/cli.hpp"
#include "mmlab/config.hpp"
#include "mmlab/parser.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mmlab;
namespace fs = std::filesystem;

namespace {

const char* kIni = R"(# quartic run
[model]
preset = quartic
g = 0.2
radius = 2

[run]
seed = 7
n_grid = 4, 8

[sampler]
samples = 50
burn_in = 20
enforce_band = false

[moments]
words = x1 x1, x1 x1 x1 x1
)";

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mmlab_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("key-value config") {
  const auto c = parse_config(kIni);
  CHECK(c.model.preset == "quartic");
  CHECK(c.model.g == doctest::Approx(0.2));
  CHECK(c.run.seed == 7);
  CHECK(c.run.n_grid == std::vector<int>{4, 8});
  CHECK(c.sampler.samples == 50);
  CHECK(c.moments.words.size() == 2);
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("echo round trip") {
  const auto c = parse_config(kIni);
  const auto text = echo(c);
  CHECK(echo(parse_config(text)) == text);
}

TEST_CASE("JSON config") {
  const auto c = parse_config(R"({"model": {"preset": "coupled", "lambda": 0.3}, "run": {"n_grid": [4]}})");
  CHECK(c.model.preset == "coupled");
  CHECK(c.model.lambda == doctest::Approx(0.3));
  CHECK(c.run.n_grid == std::vector<int>{4});
}

TEST_CASE("config errors carry a position") {
  try {
    parse_config("[model]\npreset = gue\nbogus = 1\n");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 1);
  }
  try {
    parse_config("[run]\nseed = abc\n");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
  }
  try {
    parse_config("{\"run\": {\n  \"seed\": 1,\n  \"nope\": 2}}");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"run\": "), ConfigError);
}

TEST_CASE("validation") {
  RunConfig c;
  c.run.n_grid = {8, 4};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = RunConfig{};
  c.model.preset = "coupled";
  c.model.lambda = 1.5;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = RunConfig{};
  c.model.preset = "custom";
  c.model.potential = "0.5*tr(x1^2) + ";
  CHECK_THROWS_AS(build_model(c.model), ParseError);
}

TEST_CASE("environment overrides") {
  auto c = parse_config(kIni);
  apply_environment(c, {{"MMLAB_RUN_SEED", "99"}, {"MMLAB_SAMPLER_SAMPLES", "12"}, {"PATH", "/bin"}});
  CHECK(c.run.seed == 99);
  CHECK(c.sampler.samples == 12);
  CHECK_THROWS_AS(apply_environment(c, {{"MMLAB_RUN_NOPE", "1"}}), ConfigError);
}

TEST_CASE("custom potentials") {
  ModelSection m;
  m.preset = "custom";
  m.potential = "0.5*tr(x1^2) + 0.1*tr(x1^4)";
  m.c = 1;
  m.C = 5.8;
  m.radius = 2;
  const auto V = build_model(m);
  CHECK(V.nvars() == 1);
  CHECK(V.window.C == doctest::Approx(5.8));
}

TEST_CASE("moments output is reproducible") {
  auto c = parse_config(kIni);
  const auto a = scratch("a");
  const auto b = scratch("b");
  std::ostringstream log;
  c.run.out = a.string();
  run_command("moments", c, {}, log);
  c.run.out = b.string();
  run_command("moments", c, {}, log);
  for (const char* f : {"moments_N4.csv", "moments_N8.csv"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto csv = slurp(a / "moments_N4.csv");
  CHECK(csv.rfind("word,re,im,se,sd_oracle,finite_n_oracle", 0) == 0);
  CHECK(fs::exists(a / "report.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("sample writes a chain container") {
  auto c = parse_config(kIni);
  c.run.n_grid = {4};
  const auto d = scratch("sample");
  c.run.out = d.string();
  std::ostringstream log;
  const auto r = run_command("sample", c, {}, log);
  CHECK(exit_code(r) == 0);
  CHECK(fs::exists(d / "chain_N4.mmc"));
  fs::remove_all(d);
}

TEST_CASE("verify restricted to named checks") {
  RunConfig c;
  const auto d = scratch("verify");
  c.run.out = d.string();
  std::ostringstream log;
  const auto r = run_command("verify", c, {"symbolic_laplacian", "5"}, log);
  CHECK(r.verdicts.size() == 2);
  CHECK(exit_code(r) == 0);
  CHECK(log.str().find("PASS 1:symbolic_laplacian") != std::string::npos);
  CHECK_THROWS(run_command("verify", c, {"no_such_check"}, log));
  CHECK_THROWS(run_command("nonsense", c, {}, log));
  fs::remove_all(d);
}

TEST_CASE("parse errors report the offending token") {
  try {
    parse_potential("tr(x1^2) + @");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.token() == "@");
    CHECK(e.column() == 12);
  }
}
