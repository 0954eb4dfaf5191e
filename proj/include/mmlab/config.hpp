#pragma once

#include "mmlab/condexp.hpp"
#include "mmlab/entropy.hpp"
#include "mmlab/potential.hpp"
#include "mmlab/sampler.hpp"
#include "mmlab/semigroup.hpp"
#include "mmlab/transport.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmlab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ModelSection {
  std::string preset = "gue";  // gue | shifted | quartic | coupled | custom
  std::string potential;       // trace polynomial text for custom
  int m = 1;
  int n = 0;
  double c = 0;  // window, custom only
  double C = 0;
  double radius = 0;
  double g = 0.1;
  double lambda = 0.5;
  double alpha = 1;
  std::string label;
};

struct RunSection {
  std::uint64_t seed = 1;
  std::vector<int> n_grid{8};
  std::string out = "out";
  int threads = 1;
};

struct MomentsSection {
  std::vector<std::string> words;  // empty: x1^k for k up to max_degree
  int max_degree = 6;
};

struct SemigroupSection {
  double t = 1;
  int level = 3;
  int outer_samples = 32;
  int inner_samples = 1;
  int points = 1;
  double scale = 1;  // GUE variance of the evaluation points
};

struct CondexpSection {
  std::string mode = "both";  // direct | semigroup | both
  double tol = 1e-2;
  int level = 4;
  int paths = 1000;
  double lipschitz = 1;
  double y_scale = 1;
  std::string observable = "x1";
};

struct EntropySection {
  int points = 48;
  int inner_min = 100;
  double s_max = 8;
  int grid = 33;
  std::string kind = "both";  // h | h_g | both
};

struct TransportSection {
  TransportConfig map;
  int points = 16;
  std::string direction = "both";  // forward | inverse | both
};

struct VerifySection {
  std::string suite = "acceptance";  // acceptance | model
};

struct RunConfig {
  ModelSection model;
  RunSection run;
  SamplerConfig sampler;
  InnerConfig inner;
  MomentsSection moments;
  SemigroupSection semigroup;
  CondexpSection condexp;
  EntropySection entropy;
  TransportSection transport;
  VerifySection verify;
};

// `key = value` lines under `[section]` headers, `#` comments, comma-separated
// lists. Text whose first non-blank character is '{' is read as JSON with the
// same sections as objects.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Overrides from MMLAB_<SECTION>_<KEY> variables, e.g. MMLAB_RUN_SEED.
void apply_environment(RunConfig& cfg, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> environment_overrides();

// Sets one key; throws ConfigError for unknown keys and malformed values.
void set_option(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value,
                int line = 0, int column = 0);

// Budgets positive, N-grid ascending, model parameters consistent.
void validate(const RunConfig& cfg);

// Canonical key-value form; parse_config(echo(c)) reproduces c.
std::string echo(const RunConfig& cfg);

PotentialSpec build_model(const ModelSection& m);
SamplerConfig sampler_config(const RunConfig& cfg);
EntropyConfig entropy_config(const RunConfig& cfg, int n);
CondExpConfig condexp_config(const RunConfig& cfg);

}  // namespace mmlab
