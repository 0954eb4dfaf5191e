#include "mmlab/transport.hpp"

#include "mmlab/format.hpp"
#include "mmlab/oracles.hpp"
#include "mmlab/parallel.hpp"
#include "mmlab/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mmlab {

namespace {

double window_K(const PotentialSpec& V) { return std::max(V.window.C, 1 / V.window.c); }

// Lipschitz constant of the vector field in x at time s.
double field_lipschitz(double K, double s) { return 0.5 * (K - 1) * std::exp(-s); }

struct FieldValue {
  MatrixTuple v;
  double se = 0;
};

int inner_samples_at(const TransportConfig& cfg, double s) {
  const int scaled = int(std::lround(cfg.inner.samples * std::exp(-s / 2)));
  return std::min(cfg.inner.samples, std::max(cfg.inner_min, scaled));
}

FieldValue field(const EvolvedPotential& ep, const TransportConfig& cfg, double s, const MatrixTuple& F,
                 const MatrixTuple& y, std::uint64_t seed) {
  EvolvedPotential at = ep;
  at.mode = TimeMode::Renormalized;
  at.inner.samples = inner_samples_at(cfg, s);
  const EvolvedGrad g = evolved_grad(at, s, F, y, seed);
  return {0.5 * (g.grad - F), 0.5 * g.se};
}

struct Rk4Step {
  MatrixTuple next;
  double se = 0;
};

Rk4Step rk4(const EvolvedPotential& ep, const TransportConfig& cfg, double s, double h, const MatrixTuple& F,
            const MatrixTuple& y, std::uint64_t seed) {
  const FieldValue k1 = field(ep, cfg, s, F, y, seed);
  const FieldValue k2 = field(ep, cfg, s + h / 2, F + (h / 2) * k1.v, y, seed);
  const FieldValue k3 = field(ep, cfg, s + h / 2, F + (h / 2) * k2.v, y, seed);
  const FieldValue k4 = field(ep, cfg, s + h, F + h * k3.v, y, seed);
  Rk4Step out;
  out.next = F;
  out.next.axpy(h / 6, k1.v).axpy(h / 3, k2.v).axpy(h / 3, k3.v).axpy(h / 6, k4.v);
  hermitize(out.next);
  out.se = (k1.se + 2 * k2.se + 2 * k3.se + k4.se) / 6;
  return out;
}

double step_size(double K, const TransportConfig& cfg, double s, double remaining, bool forward) {
  const auto allowed = [&](double at) {
    const double L = field_lipschitz(K, at);
    return L > 0 ? std::min(cfg.max_step, cfg.step_scale / L) : cfg.max_step;
  };
  double h = std::min(allowed(s), remaining);
  // Backward steps move toward larger Lipschitz constants.
  if (!forward)
    while (h > 1e-9 && h > allowed(std::max(0.0, s - h))) h *= 0.8;
  return h;
}

// Advances the ODE from `from` to `to`, accumulating into e.
void advance(const EvolvedPotential& ep, double from, double to, const MatrixTuple& y, const TransportConfig& cfg,
             std::uint64_t seed, MapEvaluation& e) {
  const double K = window_K(ep.model.spec);
  const bool forward = to > from;
  double s = from;
  double variance = e.inner_error * e.inner_error;
  while (std::abs(to - s) > 1e-12) {
    const double h = step_size(K, cfg, s, std::abs(to - s), forward);
    const double sh = forward ? h : -h;
    // Inner noise is frozen within a step and fresh across steps.
    const std::uint64_t ks = derive_seed(seed, std::uint64_t(e.steps));
    Rk4Step step = rk4(ep, cfg, s, sh, e.value, y, ks);
    if (cfg.step_doubling) {
      const Rk4Step a = rk4(ep, cfg, s, sh / 2, e.value, y, ks);
      const Rk4Step b = rk4(ep, cfg, s + sh / 2, sh / 2, a.next, y, derive_seed(ks, 1));
      e.ode_error += norm2(b.next - step.next) / 15;
      step.next = b.next;
      step.se = (a.se + b.se) / 2;
    }
    variance += K * h * h * step.se * step.se;
    e.inner_error = std::sqrt(variance);
    e.value = std::move(step.next);
    e.log.push_back({s, sh, step.se});
    ++e.steps;
    s = std::abs(to - (s + sh)) < 1e-12 ? to : s + sh;
  }
}

void finish(MapEvaluation& e) { e.budget = e.ode_error + 4 * e.inner_error + e.tail; }

double distance_to_mean(const MatrixTuple& a, const MatrixTuple& mean, double scale) {
  if (a.empty()) return 0;
  MatrixTuple d = a;
  if (!mean.empty()) d.axpy(-scale, mean);
  return norm2_squared(d);
}

double norm_of(const MatrixTuple& a) { return a.empty() ? 0 : norm2(a); }

std::vector<int> range(int first, int last) {
  std::vector<int> out;
  for (int k = first; k < last; ++k) out.push_back(k);
  return out;
}

}  // namespace

std::string tuple_json(const MatrixTuple& a) {
  std::ostringstream os;
  os << '[';
  for (int j = 0; j < a.size(); ++j) {
    if (j) os << ',';
    os << "{\"re\":[";
    for (int r = 0; r < a.dim(); ++r) {
      os << (r ? ",[" : "[");
      for (int c = 0; c < a.dim(); ++c) os << (c ? "," : "") << fmt17(a[j](r, c).real());
      os << ']';
    }
    os << "],\"im\":[";
    for (int r = 0; r < a.dim(); ++r) {
      os << (r ? ",[" : "[");
      for (int c = 0; c < a.dim(); ++c) os << (c ? "," : "") << fmt17(a[j](r, c).imag());
      os << ']';
    }
    os << "]}";
  }
  os << ']';
  return os.str();
}

LawSummary summarize(const Model& model, const SampleChain& chain) {
  LawSummary law;
  law.m = int(model.roles.active.size());
  std::size_t count = 0;
  for (const auto& c : chain.chains)
    for (const auto& state : c) {
      const MatrixTuple x = select(state, model.roles.active), y = select(state, model.roles.given);
      if (count == 0) {
        law.mean_x = x;
        law.mean_y = y;
      } else {
        law.mean_x += x;
        if (!y.empty()) law.mean_y += y;
      }
      ++count;
    }
  if (count == 0) throw std::invalid_argument("summarize: empty chain");
  law.mean_x *= 1.0 / double(count);
  if (!law.mean_y.empty()) law.mean_y *= 1.0 / double(count);
  for (const auto& c : chain.chains)
    for (const auto& state : c) {
      law.var_x += distance_to_mean(select(state, model.roles.active), law.mean_x, 1);
      law.var_y += distance_to_mean(select(state, model.roles.given), law.mean_y, 1);
    }
  law.var_x /= double(count);
  law.var_y /= double(count);
  return law;
}

double reverse_tail_bound(double K, const LawSummary& law, const MatrixTuple& x, const MatrixTuple& y, double t) {
  const double e = std::exp(-t / 2);
  const double point = std::sqrt(norm2_squared(x) + distance_to_mean(y, law.mean_y, 1));
  return std::sqrt(K) * e * norm_of(law.mean_x) +
         e * (K * K * K - 1) * K * (point + std::sqrt(law.m + law.var_y));
}

double forward_tail_bound(double K, const LawSummary& law, const MatrixTuple& z, const MatrixTuple& y, double s) {
  const double e = std::exp(-s / 2);
  const double point = std::sqrt(distance_to_mean(z, law.mean_x, e) + distance_to_mean(y, law.mean_y, 1));
  const double spread = std::sqrt(std::exp(-s) * law.var_x + -std::expm1(-s) * law.m + law.var_y);
  return e * norm_of(law.mean_x) + (K * K * K - 1) * std::sqrt(K) * e * (point + spread);
}

MapEvaluation integrate(const EvolvedPotential& ep, double s_target, double t_start, const MatrixTuple& x,
                        const MatrixTuple& y, const TransportConfig& cfg, std::uint64_t seed) {
  if (!std::isfinite(s_target) || !std::isfinite(t_start) || s_target < 0 || t_start < 0)
    throw std::invalid_argument("integrate: times must be finite and nonnegative");
  if (hermiticity_defect(x) > 1e-10) throw std::invalid_argument("integrate: x must be self-adjoint");
  MapEvaluation e;
  e.value = x;
  advance(ep, t_start, s_target, y, cfg, seed, e);
  finish(e);
  return e;
}

MatrixTuple integrate_map(const EvolvedPotential& ep, double s_target, double t_start, const MatrixTuple& x,
                          const MatrixTuple& y, const TransportConfig& cfg) {
  return integrate(ep, s_target, t_start, x, y, cfg, cfg.seed).value;
}

MapEvaluation TransportMap::operator()(const MatrixTuple& x, const MatrixTuple& y, std::uint64_t seed) const {
  if (hermiticity_defect(x) > 1e-10) throw std::invalid_argument("transport map: x must be self-adjoint");
  const double target = cfg.tail_fraction * cfg.tolerance;
  MapEvaluation e;
  e.value = x;
  if (std::isinf(s) && std::isinf(t)) return e;
  if (!std::isinf(s) && !std::isinf(t)) return integrate(ep, s, t, x, y, cfg, seed);
  if (std::isinf(t)) {
    double T = std::max(s, 1.0);
    while (T < cfg.max_time && reverse_tail_bound(K, law, x, y, T) > target) T += 0.25;
    e.truncation = T;
    e.tail = reverse_tail_bound(K, law, x, y, T);
    advance(ep, T, s, y, cfg, seed, e);
    finish(e);
    return e;
  }
  double T = std::max(t + 1, 1.0);
  while (T < cfg.max_time && forward_tail_bound(K, law, x, y, T) > target) T += 0.25;
  advance(ep, t, T, y, cfg, seed, e);
  while (T < cfg.max_time && forward_tail_bound(K, law, e.value, y, T) > target) {
    const double next = std::min(cfg.max_time, T + 1);
    advance(ep, T, next, y, cfg, seed, e);
    T = next;
  }
  e.truncation = T;
  e.tail = forward_tail_bound(K, law, e.value, y, T);
  finish(e);
  return e;
}

TransportMap transport_map(const Model& model, double s, double t, const LawSummary& law,
                           const TransportConfig& cfg) {
  if (s < 0 || t < 0) throw std::invalid_argument("transport_map: times must be nonnegative");
  if (!(cfg.tolerance > 0) || !(cfg.step_scale > 0) || !(cfg.max_step > 0))
    throw std::invalid_argument("transport_map: invalid integration configuration");
  TransportMap map;
  map.ep = EvolvedPotential{model, TimeMode::Renormalized, cfg.inner};
  map.s = s;
  map.t = t;
  map.law = law;
  map.cfg = cfg;
  map.K = window_K(model.spec);
  return map;
}

LipschitzBounds lipschitz_bounds(double c, double C, double s, double t) {
  const double K = std::max(C, 1 / c);
  const double gap = std::abs((std::isinf(s) ? 0 : std::exp(-s / 2)) - (std::isinf(t) ? 0 : std::exp(-t / 2)));
  LipschitzBounds b;
  b.lip = std::pow(K, 3.5);
  b.lip_dx = std::sqrt(K);
  b.lip_dy = (C / c - 1) * std::pow(std::max(C, 1 / C), 1.5) * gap;
  b.deviation = (K * K * K - 1) * std::sqrt(K) * gap;
  return b;
}

std::function<Estimate(const Word&)> gue_reference(int n) {
  return [n](const Word& w) { return Estimate{gue_word_moment(w, n), 0}; };
}

PushforwardReport pushforward_check(const TransportMap& map, const std::vector<MatrixTuple>& inputs,
                                    const std::vector<Word>& words,
                                    const std::function<Estimate(const Word&)>& reference, int doubling_points) {
  if (inputs.empty()) throw std::invalid_argument("pushforward_check: no inputs");
  const Roles& roles = map.ep.model.roles;
  const int np = int(inputs.size());
  const int m = int(roles.active.size());
  const int nd = std::clamp(doubling_points, 0, np);
  TransportMap doubled = map;
  doubled.cfg.step_doubling = true;
  std::vector<MapEvaluation> evals(np);
  std::vector<MatrixTuple> pushed(np);
  parallel_for(np, [&](int i) {
    const MatrixTuple y = select(inputs[i], roles.given);
    const TransportMap& use = i < nd ? doubled : map;
    evals[i] = use(select(inputs[i], roles.active), y, derive_seed(map.cfg.seed, std::uint64_t(i)));
    pushed[i] = concat(evals[i].value, y);
  });
  PushforwardReport rep;
  rep.points = np;
  for (int i = 0; i < nd; ++i) rep.ode_error = std::max(rep.ode_error, evals[i].ode_error);
  std::vector<double> radius(np), fixed(np);
  const double root_n = std::sqrt(double(inputs.front().dim()));
  for (int i = 0; i < np; ++i) {
    const double ode = i < nd ? evals[i].ode_error : rep.ode_error;
    fixed[i] = ode + evals[i].tail;
    rep.max_budget = std::max(rep.max_budget, ode + 4 * evals[i].inner_error + evals[i].tail);
    rep.max_inner_error = std::max(rep.max_inner_error, evals[i].inner_error);
    radius[i] = opnorm(pushed[i]) + root_n * fixed[i];
    rep.max_opnorm = std::max(rep.max_opnorm, opnorm(evals[i].value));
  }
  rep.pass = true;
  for (const Word& w : words) {
    PushforwardRow row;
    row.word = w;
    std::vector<double> values(np);
    int active_letters = 0;
    for (int v : w) active_letters += v < m;
    double map_effect = 0;
    for (int i = 0; i < np; ++i) {
      WordEvaluator<double> ev(pushed[i]);
      values[i] = ev.trace(w).real();
      if (!w.empty()) map_effect += active_letters * std::pow(radius[i], double(w.size()) - 1) * fixed[i];
    }
    row.pushed = iid_estimate(values);
    row.reference = reference(w);
    row.map_allowance = map_effect / np;
    row.allowance = 4 * std::hypot(row.pushed.se, row.reference.se) + row.map_allowance;
    row.ok = std::abs(row.pushed.mean - row.reference.mean) <= row.allowance;
    rep.pass = rep.pass && row.ok;
    rep.rows.push_back(row);
  }
  return rep;
}

InverseReport inverse_map_check(const TransportMap& F, const TransportMap& G, const std::vector<MatrixTuple>& inputs) {
  const Roles& roles = F.ep.model.roles;
  InverseReport rep;
  rep.rows.resize(inputs.size());
  parallel_for(int(inputs.size()), [&](int i) {
    const MatrixTuple x = select(inputs[i], roles.active), y = select(inputs[i], roles.given);
    const MapEvaluation f = F(x, y, derive_seed(F.cfg.seed, std::uint64_t(i)));
    const MapEvaluation g = G(f.value, y, derive_seed(G.cfg.seed, std::uint64_t(i) + (1ULL << 32)));
    rep.rows[i].error = norm2(g.value - x);
    rep.rows[i].budget = g.budget + std::sqrt(G.K) * f.budget;
  });
  rep.pass = true;
  for (const auto& r : rep.rows) {
    rep.max_error = std::max(rep.max_error, r.error);
    rep.max_budget = std::max(rep.max_budget, r.budget);
    rep.pass = rep.pass && r.error <= r.budget;
  }
  return rep;
}

LipschitzAuditReport lipschitz_audit(const TransportMap& map, const std::vector<MatrixTuple>& inputs, int pairs,
                                     double perturbation, std::uint64_t seed) {
  if (inputs.empty() || pairs < 1) throw std::invalid_argument("lipschitz_audit: need inputs and pairs");
  const PotentialSpec& V = map.ep.model.spec;
  const Roles& roles = map.ep.model.roles;
  LipschitzAuditReport rep;
  rep.bounds = lipschitz_bounds(V.window.c, V.window.C, map.s, map.t);
  rep.pairs = pairs;
  const double K = map.K;
  struct PairResult {
    double lip = 0, dx = 0, dy = 0, dev = 0, slack = 0;
  };
  std::vector<PairResult> res(pairs);
  parallel_for(pairs, [&](int p) {
    const MatrixTuple& base = inputs[std::size_t(p) % inputs.size()];
    const MatrixTuple x = select(base, roles.active), y = select(base, roles.given);
    Rng rng(derive_seed(seed, std::uint64_t(p)));
    const MatrixTuple dx = perturbation * gue_tuple(rng, x.size(), x.dim());
    const MatrixTuple dy = y.empty() ? MatrixTuple() : perturbation * gue_tuple(rng, y.size(), y.dim());
    const std::uint64_t s = derive_seed(seed ^ 0x9e3779b97f4a7c15ULL, std::uint64_t(p));
    const MapEvaluation f0 = map(x, y, s);
    const auto core = [](const MapEvaluation& e) { return e.ode_error + 4 * e.inner_error; };
    const double T = std::max(f0.truncation, 0.0);
    const double tail_lip = T > 0 ? (K * K * K - 1) * K * std::exp(-T / 2) : 0;
    PairResult r;
    const auto account = [&](const MapEvaluation& f1, const MatrixTuple& ddx, const MatrixTuple& ddy) {
      const double dn = std::sqrt(norm2_squared(ddx) + (ddy.empty() ? 0 : norm2_squared(ddy)));
      const MatrixTuple diff = f1.value - f0.value;
      r.slack = std::max(r.slack, (core(f0) + core(f1)) / dn + tail_lip * norm2(diff) / dn);
      return std::pair<double, double>{norm2(diff) / dn, norm2(diff - ddx) / dn};
    };
    const MatrixTuple zero_x(x.size(), x.dim());
    const auto [lx, devx] = account(map(x + dx, y, s), dx, MatrixTuple());
    r.dx = lx;
    r.dev = devx;
    r.lip = lx;
    if (!y.empty()) {
      const auto [ly, devy] = account(map(x, y + dy, s), zero_x, dy);
      r.dy = ly;
      r.dev = std::max(r.dev, devy);
      const auto [lj, devj] = account(map(x + dx, y + dy, s), dx, dy);
      r.lip = std::max({r.lip, ly, lj});
      r.dev = std::max(r.dev, devj);
    }
    res[p] = r;
  });
  for (const auto& r : res) {
    rep.lip = std::max(rep.lip, r.lip);
    rep.lip_dx = std::max(rep.lip_dx, r.dx);
    rep.lip_dy = std::max(rep.lip_dy, r.dy);
    rep.deviation = std::max(rep.deviation, r.dev);
    rep.slack = std::max(rep.slack, r.slack);
  }
  const auto within = [&](double value, double bound) { return value <= bound + rep.slack + 1e-12 * (1 + bound); };
  rep.pass = within(rep.lip, rep.bounds.lip) && within(rep.lip_dx, rep.bounds.lip_dx) &&
             within(rep.lip_dy, rep.bounds.lip_dy) && within(rep.deviation, rep.bounds.deviation);
  return rep;
}

GroupLawReport group_law_check(const EvolvedPotential& ep, double s, double t, double u, const MatrixTuple& x,
                               const MatrixTuple& y, const TransportConfig& cfg) {
  const double K = window_K(ep.model.spec);
  const MapEvaluation inner = integrate(ep, t, u, x, y, cfg, derive_seed(cfg.seed, 1));
  const MapEvaluation outer = integrate(ep, s, t, inner.value, y, cfg, derive_seed(cfg.seed, 2));
  const MapEvaluation direct = integrate(ep, s, u, x, y, cfg, derive_seed(cfg.seed, 3));
  GroupLawReport rep;
  rep.distance = norm2(outer.value - direct.value);
  rep.allowance = std::sqrt(K) * inner.budget + outer.budget + direct.budget;
  rep.pass = rep.distance <= rep.allowance;
  return rep;
}

TalagrandReport talagrand_check(const Model& model, const SampleChain& chain, int points, const TransportConfig& tcfg,
                                const EntropyConfig& ecfg) {
  if (points < 2) throw std::invalid_argument("talagrand_check: need at least two points");
  const std::vector<MatrixTuple> states = chain.spread(points);
  const TransportMap F = transport_map(model, kInfinity, 0, summarize(model, chain), tcfg);
  std::vector<double> cost(points), effect(points);
  parallel_for(points, [&](int i) {
    const MatrixTuple& st = states[i];
    const MatrixTuple x = select(st, model.roles.active);
    const MapEvaluation f = F(x, select(st, model.roles.given), derive_seed(tcfg.seed, std::uint64_t(i)));
    const double d = norm2(f.value - x);
    cost[i] = d * d;
    effect[i] = f.budget * (2 * d + f.budget);
  });
  TalagrandReport rep;
  rep.cost = iid_estimate(cost);
  rep.cost_allowance = 4 * rep.cost.se + mean_of(effect);
  rep.h_g = entropy_g(model, ecfg);
  rep.rhs = 2 * std::abs(rep.h_g.value);
  rep.slack = rep.rhs - rep.cost.mean;
  rep.allowance = rep.cost_allowance + 2 * rep.h_g.budget;
  rep.pass = rep.slack >= -rep.allowance;
  return rep;
}

StageError::StageError(int stage, const std::string& what)
    : std::runtime_error("triangular stage " + std::to_string(stage + 1) + ": " + what), stage_(stage) {}

TriangularMap::Evaluation TriangularMap::operator()(const MatrixTuple& x, std::uint64_t seed) const {
  if (x.size() != int(stages.size())) throw std::invalid_argument("triangular map: wrong number of variables");
  Evaluation out;
  out.value = MatrixTuple(x.size(), x.dim());
  for (int j = 0; j < int(stages.size()); ++j) {
    try {
      const MapEvaluation e = stages[j](slice(x, j, 1), slice(x, 0, j), derive_seed(seed, std::uint64_t(j)));
      out.value[j] = e.value[0];
      out.budgets.push_back(e.budget);
    } catch (const std::exception& err) {
      throw StageError(j, err.what());
    }
  }
  return out;
}

TriangularMap triangular_transport(const PotentialSpec& V, const SampleChain& chain, const TransportConfig& cfg) {
  const int m = V.nvars();
  TriangularMap phi;
  phi.spec = V;
  for (int j = 0; j < m; ++j) {
    try {
      Model stage{V, {{j}, range(0, j), range(j + 1, m)}};
      phi.stages.push_back(transport_map(stage, kInfinity, 0, summarize(stage, chain), cfg));
    } catch (const std::exception& err) {
      throw StageError(j, err.what());
    }
  }
  return phi;
}

TriangularAudit triangular_audit(const TriangularMap& phi, const std::vector<MatrixTuple>& inputs, std::uint64_t seed) {
  const double K = window_K(phi.spec);
  TriangularAudit rep;
  rep.opnorm_bound = (K * K * K - 1) * K * theta_constant();
  const int m = int(phi.stages.size());
  std::vector<char> exact(inputs.size(), 1);
  std::vector<double> worst(inputs.size(), 0);
  parallel_for(int(inputs.size()), [&](int i) {
    const MatrixTuple& x = inputs[i];
    const std::uint64_t s = derive_seed(seed, std::uint64_t(i));
    const auto base = phi(x, s);
    for (int j = 0; j < m; ++j) worst[i] = std::max(worst[i], opnorm(MatrixTuple({base.value[j] - x[j]})));
    Rng rng(derive_seed(seed ^ 0x5bd1e995ULL, std::uint64_t(i)));
    for (int k = 1; k < m; ++k) {
      MatrixTuple xp = x;
      xp[k] += 0.5 * gue(rng, x.dim());
      const auto moved = phi(xp, s);
      for (int j = 0; j < k; ++j)
        if (moved.value[j] != base.value[j]) exact[i] = 0;
    }
  });
  rep.dependency_exact = std::all_of(exact.begin(), exact.end(), [](char c) { return c != 0; });
  for (double w : worst) rep.max_opnorm = std::max(rep.max_opnorm, w);
  rep.pass = rep.dependency_exact && rep.max_opnorm <= rep.opnorm_bound;
  return rep;
}

std::string to_json(const MapEvaluation& e, const MatrixTuple& input) {
  std::ostringstream os;
  os << "{\"input\":" << tuple_json(input) << ",\"output\":" << tuple_json(e.value)
     << ",\"budget\":" << fmt17(e.budget) << ",\"ode_error\":" << fmt17(e.ode_error)
     << ",\"inner_error\":" << fmt17(e.inner_error) << ",\"tail\":" << fmt17(e.tail)
     << ",\"truncation\":" << fmt17(e.truncation) << ",\"steps\":" << e.steps << "}";
  return os.str();
}

}  // namespace mmlab
