#include "mmlab/config.hpp"

#include "mmlab/parser.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

extern char** environ;

namespace mmlab {

ConfigError::ConfigError(const std::string& what, int line, int column)
    : std::runtime_error(line > 0 ? "config:" + std::to_string(line) + ":" + std::to_string(column) + ": " + what
                                  : "config: " + what),
      line_(line),
      column_(column) {}

namespace {

const std::vector<std::string> kSections = {"model",   "run",       "sampler", "inner",     "moments",
                                            "semigroup", "condexp", "entropy", "transport", "verify"};

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(unquote(trim(item)));
  return out;
}

std::string join_list(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

template <typename T>
T parse_number(const std::string& text) {
  const std::string s = trim(text);
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("expected a number");
  return v;
}

bool parse_bool(const std::string& text) {
  std::string s = trim(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw std::invalid_argument("expected true or false");
}

std::string show(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Option {
  std::string section;
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

Option opt(const std::string& sec, const std::string& key, int& v) {
  return {sec, key, [&v](const std::string& s) { v = parse_number<int>(s); }, [&v] { return std::to_string(v); }};
}
Option opt(const std::string& sec, const std::string& key, long& v) {
  return {sec, key, [&v](const std::string& s) { v = parse_number<long>(s); }, [&v] { return std::to_string(v); }};
}
Option opt(const std::string& sec, const std::string& key, std::uint64_t& v) {
  return {sec, key, [&v](const std::string& s) { v = parse_number<std::uint64_t>(s); },
          [&v] { return std::to_string(v); }};
}
Option opt(const std::string& sec, const std::string& key, double& v) {
  return {sec, key, [&v](const std::string& s) { v = parse_number<double>(s); }, [&v] { return show(v); }};
}
Option opt(const std::string& sec, const std::string& key, bool& v) {
  return {sec, key, [&v](const std::string& s) { v = parse_bool(s); }, [&v] { return std::string(v ? "true" : "false"); }};
}
Option opt(const std::string& sec, const std::string& key, std::string& v) {
  return {sec, key, [&v](const std::string& s) { v = unquote(trim(s)); }, [&v] { return v; }};
}
Option opt(const std::string& sec, const std::string& key, std::vector<std::string>& v) {
  return {sec, key, [&v](const std::string& s) { v = split_list(s); }, [&v] { return join_list(v); }};
}
Option opt(const std::string& sec, const std::string& key, std::vector<int>& v) {
  return {sec, key,
          [&v](const std::string& s) {
            v.clear();
            for (const auto& item : split_list(s)) v.push_back(parse_number<int>(item));
          },
          [&v] {
            std::vector<std::string> items;
            for (int k : v) items.push_back(std::to_string(k));
            return join_list(items);
          }};
}

std::vector<Option> options(RunConfig& c) {
  return {
      opt("model", "preset", c.model.preset),
      opt("model", "potential", c.model.potential),
      opt("model", "m", c.model.m),
      opt("model", "n", c.model.n),
      opt("model", "c", c.model.c),
      opt("model", "C", c.model.C),
      opt("model", "radius", c.model.radius),
      opt("model", "g", c.model.g),
      opt("model", "lambda", c.model.lambda),
      opt("model", "alpha", c.model.alpha),
      opt("model", "label", c.model.label),
      opt("run", "seed", c.run.seed),
      opt("run", "n_grid", c.run.n_grid),
      opt("run", "out", c.run.out),
      opt("run", "threads", c.run.threads),
      opt("sampler", "step", c.sampler.step),
      opt("sampler", "burn_in", c.sampler.burn_in),
      opt("sampler", "thin", c.sampler.thin),
      opt("sampler", "chains", c.sampler.chains),
      opt("sampler", "samples", c.sampler.samples),
      opt("sampler", "max_iterations", c.sampler.max_iterations),
      opt("sampler", "accept_low", c.sampler.accept_low),
      opt("sampler", "accept_high", c.sampler.accept_high),
      opt("sampler", "tune", c.sampler.tune),
      opt("sampler", "enforce_band", c.sampler.enforce_band),
      opt("inner", "chains", c.inner.chains),
      opt("inner", "samples", c.inner.samples),
      opt("inner", "burn_in", c.inner.burn_in),
      opt("inner", "thin", c.inner.thin),
      opt("inner", "step", c.inner.step),
      opt("inner", "descent_steps", c.inner.descent_steps),
      opt("moments", "words", c.moments.words),
      opt("moments", "max_degree", c.moments.max_degree),
      opt("semigroup", "t", c.semigroup.t),
      opt("semigroup", "level", c.semigroup.level),
      opt("semigroup", "outer_samples", c.semigroup.outer_samples),
      opt("semigroup", "inner_samples", c.semigroup.inner_samples),
      opt("semigroup", "points", c.semigroup.points),
      opt("semigroup", "scale", c.semigroup.scale),
      opt("condexp", "mode", c.condexp.mode),
      opt("condexp", "tol", c.condexp.tol),
      opt("condexp", "level", c.condexp.level),
      opt("condexp", "paths", c.condexp.paths),
      opt("condexp", "lipschitz", c.condexp.lipschitz),
      opt("condexp", "y_scale", c.condexp.y_scale),
      opt("condexp", "observable", c.condexp.observable),
      opt("entropy", "points", c.entropy.points),
      opt("entropy", "inner_min", c.entropy.inner_min),
      opt("entropy", "s_max", c.entropy.s_max),
      opt("entropy", "grid", c.entropy.grid),
      opt("entropy", "kind", c.entropy.kind),
      opt("transport", "inner_samples", c.transport.map.inner.samples),
      opt("transport", "inner_min", c.transport.map.inner_min),
      opt("transport", "step_scale", c.transport.map.step_scale),
      opt("transport", "max_step", c.transport.map.max_step),
      opt("transport", "tolerance", c.transport.map.tolerance),
      opt("transport", "tail_fraction", c.transport.map.tail_fraction),
      opt("transport", "max_time", c.transport.map.max_time),
      opt("transport", "step_doubling", c.transport.map.step_doubling),
      opt("transport", "points", c.transport.points),
      opt("transport", "direction", c.transport.direction),
      opt("verify", "suite", c.verify.suite),
  };
}

bool known_section(const std::string& s) { return std::find(kSections.begin(), kSections.end(), s) != kSections.end(); }

// Line and column of byte offset `pos`.
std::pair<int, int> position(const std::string& text, std::size_t pos) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return show(v.get<double>());
  throw std::invalid_argument("expected a scalar or a list of scalars");
}

RunConfig parse_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, col] = position(text, byte);
    throw ConfigError("malformed JSON", line, col);
  }
  if (!doc.is_object()) throw ConfigError("top level must be an object", 1, 1);
  RunConfig cfg;
  std::size_t cursor = 0;
  for (auto& [section, body] : doc.items()) {
    const std::size_t spos = text.find('"' + section + '"', cursor);
    if (spos != std::string::npos) cursor = spos;
    auto [sline, scol] = position(text, cursor);
    if (!known_section(section)) throw ConfigError("unknown section '" + section + "'", sline, scol);
    if (!body.is_object()) throw ConfigError("section '" + section + "' must be an object", sline, scol);
    for (auto& [key, value] : body.items()) {
      const std::size_t kpos = text.find('"' + key + '"', cursor);
      if (kpos != std::string::npos) cursor = kpos;
      auto [line, col] = position(text, cursor);
      std::string s;
      try {
        if (value.is_array()) {
          std::vector<std::string> items;
          for (const auto& item : value) items.push_back(json_scalar(item));
          s = join_list(items);
        } else {
          s = json_scalar(value);
        }
      } catch (const std::invalid_argument& e) {
        throw ConfigError(section + "." + key + ": " + e.what(), line, col);
      }
      set_option(cfg, section, key, s, line, col);
    }
  }
  return cfg;
}

RunConfig parse_ini(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string body = raw;
    bool quoted = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '"') quoted = !quoted;
      if (body[i] == '#' && !quoted) {
        body = body.substr(0, i);
        break;
      }
    }
    const std::string s = trim(body);
    if (s.empty()) continue;
    const int indent = int(body.find_first_not_of(" \t")) + 1;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line, indent);
      section = trim(s.substr(1, s.size() - 2));
      if (!known_section(section)) throw ConfigError("unknown section '" + section + "'", line, indent + 1);
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line, indent);
    if (section.empty()) throw ConfigError("key outside of a section", line, indent);
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const std::size_t vstart = body.find_first_not_of(" \t", eq + 1);
    const int vcol = vstart == std::string::npos ? int(eq) + 2 : int(vstart) + 1;
    std::vector<Option> opts = options(cfg);
    const bool known_key = std::any_of(opts.begin(), opts.end(),
                                       [&](const Option& o) { return o.section == section && o.key == key; });
    set_option(cfg, section, key, value, line, known_key ? vcol : indent);
  }
  return cfg;
}

}  // namespace

void set_option(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value,
                int line, int column) {
  for (auto& o : options(cfg)) {
    if (o.section != section || o.key != key) continue;
    try {
      o.set(value);
    } catch (const std::exception& e) {
      throw ConfigError(section + "." + key + ": " + e.what() + " (got '" + value + "')", line, column);
    }
    return;
  }
  if (!known_section(section)) throw ConfigError("unknown section '" + section + "'", line, column);
  throw ConfigError("unknown key '" + key + "' in section [" + section + "]", line, column);
}

RunConfig parse_config(const std::string& text) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  RunConfig cfg = (first != std::string::npos && text[first] == '{') ? parse_json(text) : parse_ini(text);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::map<std::string, std::string> environment_overrides() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry = *e;
    if (entry.rfind("MMLAB_", 0) != 0) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    out[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return out;
}

void apply_environment(RunConfig& cfg, const std::map<std::string, std::string>& env) {
  for (const auto& [name, value] : env) {
    if (name.rfind("MMLAB_", 0) != 0) continue;
    const std::string rest = name.substr(6);
    std::string section, key;
    for (const auto& s : kSections) {
      std::string upper = s;
      std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char ch) { return std::toupper(ch); });
      if (rest.size() > upper.size() && rest.compare(0, upper.size(), upper) == 0 && rest[upper.size()] == '_') {
        section = s;
        key = rest.substr(upper.size() + 1);
      }
    }
    if (section.empty()) throw ConfigError("environment " + name + ": unknown section");
    std::string lower = key;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    auto opts = options(cfg);
    const bool exact = std::any_of(opts.begin(), opts.end(),
                                   [&](const Option& o) { return o.section == section && o.key == key; });
    try {
      set_option(cfg, section, exact ? key : lower, value);
    } catch (const ConfigError& e) {
      throw ConfigError("environment " + name + ": " + std::string(e.what()).substr(8));
    }
  }
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  const std::vector<std::string> presets = {"gue", "shifted", "quartic", "coupled", "custom"};
  if (std::find(presets.begin(), presets.end(), c.model.preset) == presets.end())
    fail("model.preset must be one of gue, shifted, quartic, coupled, custom");
  if (c.model.m < 1 || c.model.n < 0) fail("model.m must be >= 1 and model.n >= 0");
  if (c.model.preset == "custom") {
    if (c.model.potential.empty()) fail("model.potential is required for the custom preset");
    if (!(c.model.c > 0) || !(c.model.C >= c.model.c)) fail("model window must satisfy 0 < c <= C");
  }
  if (c.model.preset == "coupled" && !(std::abs(c.model.lambda) < 1)) fail("model.lambda must satisfy |lambda| < 1");
  if (c.model.preset == "quartic" && !(c.model.g >= 0)) fail("model.g must be nonnegative");
  if (c.run.n_grid.empty()) fail("run.n_grid must not be empty");
  for (std::size_t i = 0; i < c.run.n_grid.size(); ++i) {
    if (c.run.n_grid[i] < 1) fail("run.n_grid entries must be positive");
    if (i > 0 && c.run.n_grid[i] <= c.run.n_grid[i - 1]) fail("run.n_grid must be ascending");
  }
  if (c.run.threads < 1) fail("run.threads must be >= 1");
  try {
    validate(c.sampler);
  } catch (const std::exception& e) {
    fail(std::string("sampler: ") + e.what());
  }
  if (c.inner.chains < 2 || c.inner.chains % 2) fail("inner.chains must be even and >= 2");
  if (c.inner.samples < 2 || c.inner.burn_in < 0 || c.inner.thin < 1 || !(c.inner.step > 0))
    fail("inner budgets must be positive");
  if (c.moments.max_degree < 1) fail("moments.max_degree must be >= 1");
  if (!(c.semigroup.t >= 0) || c.semigroup.level < 0 || c.semigroup.outer_samples < 1 ||
      c.semigroup.inner_samples < 1 || c.semigroup.points < 1 || !(c.semigroup.scale > 0))
    fail("semigroup budgets must be positive");
  if (c.condexp.mode != "direct" && c.condexp.mode != "semigroup" && c.condexp.mode != "both")
    fail("condexp.mode must be direct, semigroup or both");
  if (!(c.condexp.tol > 0) || c.condexp.paths < 2 || c.condexp.level < 0 || !(c.condexp.lipschitz > 0))
    fail("condexp budgets must be positive");
  if (c.entropy.points < 2 || c.entropy.inner_min < 2 || !(c.entropy.s_max > 0) || c.entropy.grid < 3 ||
      c.entropy.grid % 2 == 0)
    fail("entropy budgets must be positive and entropy.grid odd");
  if (c.entropy.kind != "h" && c.entropy.kind != "h_g" && c.entropy.kind != "both")
    fail("entropy.kind must be h, h_g or both");
  const auto& t = c.transport.map;
  if (t.inner.samples < 2 || t.inner_min < 2 || !(t.step_scale > 0) || !(t.max_step > 0) || !(t.tolerance > 0) ||
      !(t.tail_fraction > 0) || !(t.max_time > 0) || c.transport.points < 1)
    fail("transport budgets must be positive");
  if (c.transport.direction != "forward" && c.transport.direction != "inverse" && c.transport.direction != "both")
    fail("transport.direction must be forward, inverse or both");
  if (c.verify.suite != "acceptance" && c.verify.suite != "model") fail("verify.suite must be acceptance or model");
}

std::string echo(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::ostringstream os;
  std::string section;
  for (const auto& o : options(copy)) {
    if (o.section != section) {
      os << (section.empty() ? "" : "\n") << "[" << o.section << "]\n";
      section = o.section;
    }
    std::string v = o.get();
    if (v.find('#') != std::string::npos) v = "\"" + v + "\"";
    os << o.key << " = " << v << "\n";
  }
  return os.str();
}

PotentialSpec build_model(const ModelSection& m) {
  PotentialSpec V;
  const int k = m.m + m.n;
  if (m.preset == "gue") {
    V = quadratic_spec(std::vector<double>(k, 0.0), m.n);
  } else if (m.preset == "shifted") {
    V = quadratic_spec(std::vector<double>(k, m.alpha), m.n);
  } else if (m.preset == "quartic") {
    if (k != 1) throw ConfigError("quartic preset has one variable");
    V = quartic_spec(m.g, m.radius > 0 ? m.radius : 2.0);
  } else if (m.preset == "coupled") {
    V = coupled_gaussian_spec(m.lambda, m.m, m.n);
  } else if (m.preset == "custom") {
    V = make_spec(Potential::trace_poly(parse_potential(m.potential, k)), {m.c, m.C}, m.m, m.n);
    V.opnorm_radius = m.radius;
  } else {
    throw ConfigError("unknown model preset '" + m.preset + "'");
  }
  if (!m.label.empty()) V.label = m.label;
  return V;
}

SamplerConfig sampler_config(const RunConfig& cfg) {
  SamplerConfig s = cfg.sampler;
  s.seed = derive_seed(cfg.run.seed, 0x5a);
  return s;
}

EntropyConfig entropy_config(const RunConfig& cfg, int n) {
  EntropyConfig e;
  e.n = n;
  e.outer = sampler_config(cfg);
  e.points = cfg.entropy.points;
  e.inner = cfg.inner;
  e.inner_min = cfg.entropy.inner_min;
  e.s_max = cfg.entropy.s_max;
  e.grid = cfg.entropy.grid;
  e.seed = derive_seed(cfg.run.seed, 0xe7);
  return e;
}

CondExpConfig condexp_config(const RunConfig& cfg) {
  CondExpConfig c;
  c.sampler = sampler_config(cfg);
  c.tt.paths = cfg.condexp.paths;
  c.tt.seed = derive_seed(cfg.run.seed, 0xce);
  c.level = cfg.condexp.level;
  c.tol = cfg.condexp.tol;
  c.lipschitz = cfg.condexp.lipschitz;
  return c;
}

}  // namespace mmlab
