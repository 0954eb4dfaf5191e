#include "mmlab/cli.hpp"

#include "mmlab/condexp.hpp"
#include "mmlab/container.hpp"
#include "mmlab/entropy.hpp"
#include "mmlab/format.hpp"
#include "mmlab/oracles.hpp"
#include "mmlab/parser.hpp"
#include "mmlab/semigroup.hpp"
#include "mmlab/transport.hpp"
#include "mmlab/verify.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace mmlab {

namespace {

namespace fs = std::filesystem;

struct Context {
  const RunConfig& cfg;
  PotentialSpec V;
  fs::path dir;
  std::ostream& out;

  fs::path path(const std::string& name) const { return dir / name; }
  void write(const std::string& name, const std::string& body) const {
    std::ofstream f(path(name), std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path(name).string());
    f << body;
  }
};

std::string suffix(int n) { return "_N" + std::to_string(n); }

SamplerConfig chain_config(const RunConfig& cfg, int n) {
  SamplerConfig s = sampler_config(cfg);
  s.seed = derive_seed(s.seed, std::uint64_t(n));
  return s;
}

std::vector<Word> moment_words(const RunConfig& cfg, int nvars) {
  std::vector<Word> out;
  for (const auto& w : cfg.moments.words) out.push_back(parse_word(w, nvars));
  if (out.empty())
    for (int k = 1; k <= cfg.moments.max_degree; ++k) out.push_back(Word(k, 0));
  return out;
}

bool single_letter(const Word& w) {
  for (int a : w)
    if (a != 0) return false;
  return true;
}

void cmd_sample(const Context& c) {
  for (int n : c.cfg.run.n_grid) {
    const SampleChain chain = sample(c.V, n, chain_config(c.cfg, n));
    save_chain(chain, c.path("chain" + suffix(n) + ".mmc").string());
    std::ostringstream js;
    js << "{\"N\":" << n << ",\"states\":" << chain.size() << ",\"seed\":" << chain.seed
       << ",\"mean_acceptance\":" << fmt17(chain.mean_acceptance()) << ",\"chains\":[";
    for (std::size_t k = 0; k < chain.chains.size(); ++k)
      js << (k ? "," : "") << "{\"length\":" << chain.chains[k].size() << ",\"acceptance\":" << fmt17(chain.acceptance[k])
         << ",\"step\":" << fmt17(chain.step[k]) << "}";
    js << "],\"second_moments\":[";
    for (int j = 0; j < c.V.nvars(); ++j) {
      const Estimate e = chain.estimate([j](const MatrixTuple& x) { return tau(x[j] * x[j]).real(); });
      js << (j ? "," : "") << "{\"variable\":" << j + 1 << ",\"mean\":" << fmt17(e.mean) << ",\"se\":" << fmt17(e.se)
         << ",\"ess\":" << fmt17(e.ess) << "}";
    }
    js << "]}\n";
    c.write("sample" + suffix(n) + ".json", js.str());
    c.out << "N=" << n << " states=" << chain.size() << " acceptance=" << chain.mean_acceptance()
          << " -> " << c.path("chain" + suffix(n) + ".mmc").string() << "\n";
  }
}

void cmd_moments(const Context& c) {
  const ModelSection& m = c.cfg.model;
  const bool one_matrix = c.V.nvars() == 1 && (m.preset == "gue" || m.preset == "quartic");
  const double g = m.preset == "quartic" ? m.g : 0.0;
  for (int n : c.cfg.run.n_grid) {
    const SampleChain chain = sample(c.V, n, chain_config(c.cfg, n));
    const std::vector<Word> words = moment_words(c.cfg, c.V.nvars());
    const MomentTable t = estimate_moments(chain, words);
    int maxdeg = 0;
    for (const auto& w : words) maxdeg = std::max(maxdeg, int(w.size()));
    std::vector<double> large_n, finite;
    if (one_matrix) {
      large_n = quartic_moments(g, maxdeg / 2 + 1);
      if (m.preset == "quartic") finite = solve_one_matrix(quartic_coefficients(g), n, maxdeg + 1).moments;
    }
    std::ostringstream csv;
    csv << "word,re,im,se,sd_oracle,finite_n_oracle\n";
    for (const auto& e : t.entries) {
      const std::size_t k = e.word.size();
      std::string sd, fn;
      if (one_matrix && single_letter(e.word)) {
        sd = fmt17(k % 2 ? 0.0 : large_n[k / 2]);
        if (!finite.empty()) fn = fmt17(finite[k]);
      }
      if (m.preset == "gue") fn = fmt17(gue_word_moment(e.word, n));
      csv << to_string(e.word) << ',' << fmt17(e.value.real()) << ',' << fmt17(e.value.imag()) << ','
          << fmt17(e.se) << ',' << sd << ',' << fn << '\n';
    }
    c.write("moments" + suffix(n) + ".csv", csv.str());
    c.out << "N=" << n << " " << t.entries.size() << " moments -> " << c.path("moments" + suffix(n) + ".csv").string()
          << "\n";
  }
}

MatrixTuple random_block(Rng& rng, int count, int n, double variance) {
  return count == 0 ? MatrixTuple(0, n) : gue_tuple(rng, count, n, variance);
}

void cmd_semigroup(const Context& c) {
  const SemigroupSection& s = c.cfg.semigroup;
  for (int n : c.cfg.run.n_grid) {
    Rng rng(derive_seed(c.cfg.run.seed, 0x5e00 + std::uint64_t(n)));
    TrotterConfig tc;
    tc.outer_samples = s.outer_samples;
    tc.inner_samples = s.inner_samples;
    tc.seed = derive_seed(c.cfg.run.seed, 0x5e);
    std::ostringstream js;
    js << "{\"N\":" << n << ",\"t\":" << fmt17(s.t) << ",\"level\":" << s.level << ",\"points\":[";
    for (int p = 0; p < s.points; ++p) {
      const MatrixTuple x = random_block(rng, c.V.m, n, s.scale);
      const MatrixTuple y = random_block(rng, c.V.n, n, s.scale);
      const TrotterResult r = trotter_R(c.V, s.t, s.level, x, y, tc);
      js << (p ? "," : "") << "{\"x\":" << tuple_json(x) << ",\"y\":" << tuple_json(y)
         << ",\"value\":" << fmt17(r.value) << ",\"se\":" << fmt17(r.value_se) << ",\"offset\":" << fmt17(r.offset)
         << ",\"grad\":" << tuple_json(r.grad) << ",\"grad_se\":" << fmt17(r.grad_se)
         << ",\"bound\":" << fmt17(r.value_bound) << ",\"grad_bound\":" << fmt17(r.grad_bound)
         << ",\"steps\":" << r.steps << "}";
      c.out << "N=" << n << " point " << p << " R u = " << r.value << " +- " << r.value_se
            << " (a priori " << r.value_bound << ")\n";
    }
    js << "]}\n";
    c.write("semigroup" + suffix(n) + ".json", js.str());
  }
}

std::string condexp_json(const CondExpResult& r) {
  std::ostringstream js;
  js << "{\"mode\":" << json_string(r.mode == CondMode::Direct ? "direct" : "semigroup")
     << ",\"estimate\":" << tuple_json(r.estimate) << ",\"se\":" << fmt17(r.se) << ",\"certificate\":{\"envelope\":"
     << fmt17(r.envelope) << ",\"discretization_bound\":" << fmt17(r.discretization_bound)
     << ",\"t\":" << fmt17(r.t) << ",\"level\":" << r.level << "}}";
  return js.str();
}

void cmd_condexp(const Context& c) {
  const CondexpSection& s = c.cfg.condexp;
  if (c.V.n == 0) throw std::invalid_argument("condexp needs a model with a y-block (model.n >= 1)");
  const Observable f = observable(parse_operator(s.observable, c.V.nvars()));
  const CondExpConfig cc = condexp_config(c.cfg);
  for (int n : c.cfg.run.n_grid) {
    Rng rng(derive_seed(c.cfg.run.seed, 0xc0 + std::uint64_t(n)));
    const MatrixTuple y = gue_tuple(rng, c.V.n, n, s.y_scale);
    std::ostringstream js;
    js << "{\"N\":" << n << ",\"observable\":" << json_string(s.observable) << ",\"y\":" << tuple_json(y);
    if (s.mode == "both") {
      const ModeAgreement a = cond_exp_both(f, c.V, y, cc);
      js << ",\"results\":[" << condexp_json(a.direct) << "," << condexp_json(a.semigroup)
         << "],\"distance\":" << fmt17(a.distance) << ",\"allowance\":" << fmt17(a.allowance)
         << ",\"agree\":" << (a.agree ? "true" : "false");
      c.out << "N=" << n << " modes differ by " << a.distance << " (allowance " << a.allowance << ")\n";
    } else {
      const CondExpResult r = cond_exp(f, c.V, y, s.mode == "direct" ? CondMode::Direct : CondMode::Semigroup, cc);
      js << ",\"results\":[" << condexp_json(r) << "]";
      c.out << "N=" << n << " " << s.mode << " estimate se " << r.se << "\n";
    }
    js << "}\n";
    c.write("condexp" + suffix(n) + ".json", js.str());
  }
}

void cmd_entropy(const Context& c) {
  const Model model = default_model(c.V);
  const std::string kind = c.cfg.entropy.kind;
  for (int n : c.cfg.run.n_grid) {
    const EntropyConfig ec = entropy_config(c.cfg, n);
    std::vector<std::string> parts;
    auto emit = [&](const EntropyQuadrature& q) {
      std::ostringstream csv;
      write_grid_csv(q, csv);
      c.write("entropy_" + q.kind + suffix(n) + ".csv", csv.str());
      parts.push_back(to_json(q));
      c.out << "N=" << n << " " << q.kind << " = " << q.value << " (budget " << q.budget << ")\n";
    };
    if (kind == "h" || kind == "both") emit(entropy(model, ec));
    if (kind == "h_g" || kind == "both") emit(entropy_g(model, ec));
    std::string js = "{\"N\":" + std::to_string(n) + ",\"quadratures\":[";
    for (std::size_t i = 0; i < parts.size(); ++i) js += (i ? "," : "") + parts[i];
    c.write("entropy" + suffix(n) + ".json", js + "]}\n");
  }
}

void cmd_transport(const Context& c) {
  const Model model = default_model(c.V);
  const TransportSection& s = c.cfg.transport;
  TransportConfig tc = s.map;
  tc.inner.chains = c.cfg.inner.chains;
  tc.inner.burn_in = c.cfg.inner.burn_in;
  tc.inner.step = c.cfg.inner.step;
  tc.seed = derive_seed(c.cfg.run.seed, 0x7a);
  const bool forward = s.direction != "inverse";
  const bool inverse = s.direction != "forward";
  for (int n : c.cfg.run.n_grid) {
    const SampleChain chain = sample(c.V, n, chain_config(c.cfg, n));
    const LawSummary law = summarize(model, chain);
    const TransportMap F = transport_map(model, kInfinity, 0, law, tc);
    const TransportMap G = transport_map(model, 0, kInfinity, law, tc);
    const std::vector<MatrixTuple> inputs = chain.spread(s.points);
    std::vector<std::string> rows(inputs.size());
    std::vector<MatrixTuple> pushed(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const MatrixTuple x = select(inputs[i], model.roles.active), y = select(inputs[i], model.roles.given);
      std::ostringstream js;
      js << "{\"given\":" << tuple_json(y);
      if (forward) {
        const MapEvaluation f = F(x, y, derive_seed(tc.seed, i));
        pushed[i] = f.value;
        js << ",\"forward\":" << to_json(f, x);
        if (inverse) {
          const MapEvaluation g = G(f.value, y, derive_seed(tc.seed, i + (1ULL << 32)));
          js << ",\"inverse\":" << to_json(g, f.value) << ",\"round_trip_error\":" << fmt17(norm2(g.value - x));
        }
      } else {
        const MapEvaluation g = G(x, y, derive_seed(tc.seed, i + (1ULL << 32)));
        js << ",\"inverse\":" << to_json(g, x);
      }
      rows[i] = js.str() + "}";
      c.out << "N=" << n << " point " << i << " done\n" << std::flush;
    }
    std::ostringstream js;
    js << "{\"N\":" << n << ",\"direction\":" << json_string(s.direction) << ",\"points\":[";
    for (std::size_t i = 0; i < rows.size(); ++i) js << (i ? "," : "") << rows[i];
    js << "]";
    if (forward && model.roles.given.empty()) {
      js << ",\"pushforward\":[";
      for (int k = 1; k <= 4; ++k) {
        std::vector<double> v;
        for (const auto& p : pushed) {
          Matrix a = Matrix::Identity(n, n);
          for (int r = 0; r < k; ++r) a = a * p[0];
          v.push_back(tau(a).real());
        }
        const Estimate e = iid_estimate(v);
        js << (k > 1 ? "," : "") << "{\"word\":" << json_string(to_string(Word(k, 0))) << ",\"mean\":" << fmt17(e.mean)
           << ",\"se\":" << fmt17(e.se) << ",\"gue\":" << fmt17(gue_word_moment(Word(k, 0), n)) << "}";
        c.out << "N=" << n << " tau(F^" << k << ") = " << e.mean << " +- " << e.se << " (GUE "
              << gue_word_moment(Word(k, 0), n) << ")\n";
      }
      js << "]";
    }
    js << "}\n";
    c.write("transport" + suffix(n) + ".json", js.str());
  }
}

void cmd_triangular(const Context& c) {
  TransportConfig tc = c.cfg.transport.map;
  tc.inner.chains = c.cfg.inner.chains;
  tc.seed = derive_seed(c.cfg.run.seed, 0x7b);
  PotentialSpec V = c.V;
  V.m = V.nvars();
  V.n = 0;
  for (int n : c.cfg.run.n_grid) {
    const SampleChain chain = sample(V, n, chain_config(c.cfg, n));
    const TriangularMap phi = triangular_transport(V, chain, tc);
    const std::vector<MatrixTuple> inputs = chain.spread(c.cfg.transport.points);
    std::ostringstream js;
    js << "{\"N\":" << n << ",\"points\":[";
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto e = phi(inputs[i], derive_seed(tc.seed, i));
      js << (i ? "," : "") << "{\"input\":" << tuple_json(inputs[i]) << ",\"output\":" << tuple_json(e.value)
         << ",\"budgets\":[";
      for (std::size_t j = 0; j < e.budgets.size(); ++j) js << (j ? "," : "") << fmt17(e.budgets[j]);
      js << "]}";
      c.out << "N=" << n << " point " << i << " done\n" << std::flush;
    }
    const TriangularAudit a = triangular_audit(phi, {inputs.front()}, derive_seed(tc.seed, 0xa0));
    js << "],\"audit\":{\"dependency_exact\":" << (a.dependency_exact ? "true" : "false")
       << ",\"max_opnorm\":" << fmt17(a.max_opnorm) << ",\"opnorm_bound\":" << fmt17(a.opnorm_bound) << "}}\n";
    c.write("triangular" + suffix(n) + ".json", js.str());
    c.out << "N=" << n << " dependency exact " << a.dependency_exact << "\n";
  }
}

std::vector<Verdict> cmd_verify(const Context& c, const std::vector<std::string>& checks) {
  if (c.cfg.verify.suite == "model" && checks.empty()) return model_suite(c.cfg, c.out);
  std::vector<int> ks;
  for (const auto& name : checks) {
    const int k = criterion_index(name);
    if (k == 0) throw std::invalid_argument("unknown check '" + name + "'");
    ks.push_back(k);
  }
  if (ks.empty())
    for (int k = 1; k <= kCriteria; ++k) ks.push_back(k);
  return run_acceptance(ks, c.cfg.run.seed, c.out);
}

}  // namespace

RunReport run_command(const std::string& command, const RunConfig& cfg, const std::vector<std::string>& checks,
                      std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  validate(cfg);
  fs::create_directories(cfg.run.out);
  Context c{cfg, build_model(cfg.model), fs::path(cfg.run.out), out};
  RunReport r;
  r.command = command;
  r.config = echo(cfg);
  r.env = fingerprint(cfg.run.seed);
  try {
    if (command == "sample") cmd_sample(c);
    else if (command == "moments") cmd_moments(c);
    else if (command == "semigroup") cmd_semigroup(c);
    else if (command == "condexp") cmd_condexp(c);
    else if (command == "entropy") cmd_entropy(c);
    else if (command == "transport") cmd_transport(c);
    else if (command == "triangular") cmd_triangular(c);
    else if (command == "verify") r.verdicts = cmd_verify(c, checks);
    else throw std::invalid_argument("unknown command '" + command + "'");
  } catch (const ParseError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(command + ": " + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.write("report.json", r.to_json() + "\n");
  return r;
}

int exit_code(const RunReport& r) { return r.pass() ? 0 : 1; }

}  // namespace mmlab
