#include "mmlab/condexp.hpp"

#include "mmlab/parallel.hpp"
#include "mmlab/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace mmlab {

namespace {

long flow_steps(const PotentialSpec& V, double t, const OdeConfig& cfg) {
  if (!(cfg.step_factor > 0)) throw std::invalid_argument("flow_W: step factor must be positive");
  const double C = std::max(V.window.C, 1e-12);
  const double s = std::ceil(t * C / cfg.step_factor - 1e-12);
  if (s > double(cfg.max_steps)) {
    std::ostringstream os;
    os << "flow_W: step-size underflow, " << s << " steps needed for t = " << t << " (limit " << cfg.max_steps << ")";
    throw IntegrationError(os.str());
  }
  return std::max(1L, long(s));
}

void rk4(const PotentialSpec& V, const std::vector<int>& xs, MatrixTuple& w, const MatrixTuple& y, double h,
         long steps) {
  auto field = [&](const MatrixTuple& p) { return -0.5 * V.potential.grad(concat(p, y), xs); };
  for (long s = 0; s < steps; ++s) {
    const MatrixTuple k1 = field(w);
    const MatrixTuple k2 = field(w + (h / 2) * k1);
    const MatrixTuple k3 = field(w + (h / 2) * k2);
    const MatrixTuple k4 = field(w + h * k3);
    w.axpy(h / 6, k1);
    w.axpy(h / 3, k2);
    w.axpy(h / 3, k3);
    w.axpy(h / 6, k4);
    hermitize(w);
  }
}

void check_blocks(const PotentialSpec& V, const MatrixTuple& x, const MatrixTuple& y, const char* who) {
  if (x.size() != V.m || y.size() != V.n)
    throw std::invalid_argument(std::string(who) + ": block sizes do not match the potential");
}

// One path of (P_h S_h)^k from x with the given increments.
MatrixTuple run_path(const PotentialSpec& V, const std::vector<int>& xs, MatrixTuple x, const MatrixTuple& y,
                     const std::vector<MatrixTuple>& increments, double h, long sub, const OdeConfig&) {
  for (const auto& z : increments) {
    x += z;
    rk4(V, xs, x, y, h / double(sub), sub);
  }
  return x;
}

TupleEstimate estimate_paths(const std::vector<MatrixTuple>& vals) { return mean_tuple({vals}); }

long dyadic_steps(double t, int level) {
  const double k = std::ldexp(t, level);
  if (t < 0 || std::abs(k - std::round(k)) > 1e-9) throw std::invalid_argument("Tt_apply: t must be a multiple of 2^-level");
  return long(std::round(k));
}

std::vector<MatrixTuple> tt_paths(const Observable& f, const PotentialSpec& V, const MatrixTuple& x,
                                  const MatrixTuple& y, double t, int level, const TtConfig& cfg) {
  check_blocks(V, x, y, "Tt_apply");
  if (cfg.paths < 4) throw std::invalid_argument("Tt_apply: need at least four paths");
  const long k = dyadic_steps(t, level);
  const double h = std::ldexp(1.0, -level);
  const long sub = flow_steps(V, h, cfg.ode);
  const std::vector<int> xs = block_indices(V, Block::X);
  std::vector<MatrixTuple> out(cfg.paths);
  parallel_for(cfg.paths, [&](int p) {
    Rng rng(derive_seed(cfg.seed, std::uint64_t(p)));
    std::vector<MatrixTuple> inc(k);
    for (auto& z : inc) z = gue_tuple(rng, x.size(), x.dim(), h);
    out[p] = f(run_path(V, xs, x, y, inc, h, sub, cfg.ode), y);
  });
  return out;
}

}  // namespace

FlowResult flow_W(const PotentialSpec& V, const MatrixTuple& x, const MatrixTuple& y, double t,
                  const OdeConfig& cfg) {
  check_blocks(V, x, y, "flow_W");
  if (t < 0) throw std::invalid_argument("flow_W: t must be nonnegative");
  FlowResult r;
  r.w = x;
  r.t = t;
  if (t == 0) return r;
  r.steps = flow_steps(V, t, cfg);
  r.h = t / double(r.steps);
  rk4(V, block_indices(V, Block::X), r.w, y, r.h, r.steps);
  return r;
}

double flow_contraction_ratio(const PotentialSpec& V, const MatrixTuple& x, const MatrixTuple& xp,
                              const MatrixTuple& y, double t, const OdeConfig& cfg) {
  const double d0 = norm2(x - xp);
  if (d0 == 0) return 0;
  const double d1 = norm2(flow_W(V, x, y, t, cfg).w - flow_W(V, xp, y, t, cfg).w);
  return d1 / (std::exp(-V.window.c * t / 2) * d0);
}

Observable observable(const OperatorTracePoly& f) { return observable(std::vector<OperatorTracePoly>{f}); }

Observable observable(const std::vector<OperatorTracePoly>& f) {
  return [f](const MatrixTuple& x, const MatrixTuple& y) {
    const MatrixTuple z = concat(x, y);
    WordEvaluator<double> ev(z);
    MatrixTuple out;
    for (const auto& p : f) out.push_back(evaluate_operator(p, ev));
    return out;
  };
}

Observable x_block() {
  return [](const MatrixTuple& x, const MatrixTuple&) { return x; };
}

Observable y_block() {
  return [](const MatrixTuple&, const MatrixTuple& y) { return y; };
}

double Tt_discretization_bound(const PotentialSpec& V, int level, double lipschitz) {
  return V.window.C * std::sqrt(double(V.m)) / (V.window.c * (2 - std::numbers::sqrt2)) *
         std::ldexp(1.0, -level) / std::sqrt(std::ldexp(1.0, -level)) * lipschitz;
}

TtResult Tt_apply(const Observable& f, double lipschitz, const PotentialSpec& V, const MatrixTuple& x,
                  const MatrixTuple& y, double t, int level, const TtConfig& cfg) {
  TtResult r;
  r.steps = dyadic_steps(t, level);
  const TupleEstimate e = estimate_paths(tt_paths(f, V, x, y, t, level, cfg));
  r.mean = e.mean;
  r.se = e.se;
  r.bound = Tt_discretization_bound(V, level, lipschitz);
  return r;
}

RefinementReport Tt_refinement(const Observable& f, double lipschitz, const PotentialSpec& V, const MatrixTuple& x,
                               const MatrixTuple& y, double t, int first_level, int last_level,
                               const TtConfig& cfg) {
  check_blocks(V, x, y, "Tt_refinement");
  if (first_level < 0 || last_level < first_level)
    throw std::invalid_argument("Tt_refinement: invalid level range");
  if (cfg.paths < 4) throw std::invalid_argument("Tt_refinement: need at least four paths");
  const int finest = last_level + 1;
  const long kf = dyadic_steps(t, first_level) << (finest - first_level);
  const double hf = std::ldexp(1.0, -finest);
  const std::vector<int> xs = block_indices(V, Block::X);
  const int nl = finest - first_level + 1;
  std::vector<std::vector<MatrixTuple>> vals(nl, std::vector<MatrixTuple>(cfg.paths));
  parallel_for(cfg.paths, [&](int p) {
    Rng rng(derive_seed(cfg.seed, std::uint64_t(p)));
    std::vector<MatrixTuple> fine(kf);
    for (auto& z : fine) z = gue_tuple(rng, x.size(), x.dim(), hf);
    for (int li = 0; li < nl; ++li) {
      const int level = first_level + li;
      const long group = 1L << (finest - level);
      const double h = std::ldexp(1.0, -level);
      std::vector<MatrixTuple> inc(kf / group, MatrixTuple(x.size(), x.dim()));
      for (long i = 0; i < kf; ++i) inc[i / group] += fine[i];
      vals[li][p] = f(run_path(V, xs, x, y, inc, h, flow_steps(V, h, cfg.ode), cfg.ode), y);
    }
  });
  RefinementReport rep;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int li = 0; li + 1 < nl; ++li) {
    std::vector<MatrixTuple> d(cfg.paths);
    for (int p = 0; p < cfg.paths; ++p) d[p] = vals[li][p] - vals[li + 1][p];
    const TupleEstimate e = estimate_paths(d);
    const int level = first_level + li;
    rep.levels.push_back(level);
    rep.deltas.push_back(norm2(e.mean));
    rep.se.push_back(e.se);
    rep.bounds.push_back(Tt_discretization_bound(V, level, lipschitz));
    const double ly = std::log2(std::max(rep.deltas.back(), 1e-300));
    sx += level;
    sy += ly;
    sxx += double(level) * level;
    sxy += level * ly;
  }
  const double k = double(rep.levels.size());
  rep.slope = k > 1 ? (k * sxy - sx * sy) / (k * sxx - sx * sx) : 0.0;
  return rep;
}

double semigroup_envelope(double c, double C, double t, double grad_norm, double lipschitz) {
  if (!(t > 0)) return INFINITY;
  return std::exp(-c * t / 2) *
         (4 * (C / (c * c)) * (6 + 5 * std::numbers::sqrt2) / std::sqrt(t) + (2 / c) * grad_norm) * lipschitz;
}

namespace {

double choose_time(const PotentialSpec& V, double grad_norm, const CondExpConfig& cfg, double& envelope) {
  for (double t = 1; t <= cfg.max_time; t += 1) {
    envelope = semigroup_envelope(V.window.c, V.window.C, t, grad_norm, cfg.lipschitz);
    if (envelope < cfg.tol) return t;
  }
  std::ostringstream os;
  os << "cond_exp: envelope stays above " << cfg.tol << " up to t = " << cfg.max_time << " (" << envelope << ")";
  throw ConvergenceError(os.str());
}

}  // namespace

CondExpResult cond_exp(const Observable& f, const PotentialSpec& V, const MatrixTuple& y, CondMode mode,
                       const CondExpConfig& cfg) {
  if (V.m == 0) throw std::invalid_argument("cond_exp: potential has no x-block");
  if (y.size() != V.n) throw std::invalid_argument("cond_exp: y has the wrong number of matrices");
  if (V.n == 0 && y.dim() < 1) throw std::invalid_argument("cond_exp: pass an empty tuple with the matrix size");
  CondExpResult r;
  r.mode = mode;
  const int n = y.dim();
  if (mode == CondMode::Direct) {
    Target target = conditional_target(V, y);
    if (V.n == 0) target.base = MatrixTuple(V.m, n);
    const SampleChain chain = sample(target, cfg.sampler);
    const std::vector<int> xs = block_indices(V, Block::X);
    std::vector<std::vector<MatrixTuple>> vals(chain.chains.size());
    for (std::size_t c = 0; c < chain.chains.size(); ++c)
      for (const auto& s : chain.chains[c]) vals[c].push_back(f(select(s, xs), y));
    const TupleEstimate e = mean_tuple(vals);
    r.estimate = e.mean;
    r.se = e.se;
    return r;
  }
  const MatrixTuple x0(V.m, n);
  const double g = norm2(V.potential.grad(concat(x0, y), block_indices(V, Block::X)));
  r.t = choose_time(V, g, cfg, r.envelope);
  r.level = cfg.level;
  const TtResult tt = Tt_apply(f, cfg.lipschitz, V, x0, y, r.t, cfg.level, cfg.tt);
  r.estimate = tt.mean;
  r.se = tt.se;
  r.discretization_bound = tt.bound;
  return r;
}

ModeAgreement cond_exp_both(const Observable& f, const PotentialSpec& V, const MatrixTuple& y,
                            const CondExpConfig& cfg) {
  ModeAgreement a;
  a.direct = cond_exp(f, V, y, CondMode::Direct, cfg);
  a.semigroup = cond_exp(f, V, y, CondMode::Semigroup, cfg);
  a.distance = norm2(a.direct.estimate - a.semigroup.estimate);
  a.allowance = 4 * std::hypot(a.direct.se, a.semigroup.se) + a.semigroup.envelope;
  a.agree = a.distance <= a.allowance;
  return a;
}

LipschitzAudit condexp_lipschitz_audit(const Observable& f, const PotentialSpec& V, int n, int pairs,
                                       std::uint64_t seed, const CondExpConfig& cfg) {
  if (V.n == 0) throw std::invalid_argument("condexp_lipschitz_audit: potential has no y-block");
  if (pairs < 1) throw std::invalid_argument("condexp_lipschitz_audit: need at least one pair");
  LipschitzAudit rep;
  rep.bound = (1 + V.window.C / V.window.c) * cfg.lipschitz;
  Rng rng(seed);
  const MatrixTuple x0(V.m, n);
  const std::vector<int> xs = block_indices(V, Block::X);
  bool ok = true;
  for (int k = 0; k < pairs; ++k) {
    const MatrixTuple y = gue_tuple(rng, V.n, n);
    MatrixTuple yp = y;
    yp.axpy(0.5, gue_tuple(rng, V.n, n));
    double env_a = 0, env_b = 0;
    const double ta = choose_time(V, norm2(V.potential.grad(concat(x0, y), xs)), cfg, env_a);
    const double tb = choose_time(V, norm2(V.potential.grad(concat(x0, yp), xs)), cfg, env_b);
    const double t = std::max(ta, tb);
    const auto va = tt_paths(f, V, x0, y, t, cfg.level, cfg.tt);
    const auto vb = tt_paths(f, V, x0, yp, t, cfg.level, cfg.tt);
    std::vector<MatrixTuple> d(va.size());
    for (std::size_t p = 0; p < va.size(); ++p) d[p] = va[p] - vb[p];
    const TupleEstimate e = estimate_paths(d);
    const double dy = norm2(y - yp);
    const double ratio = norm2(e.mean) / dy;
    const double slack = (4 * e.se + env_a + env_b) / dy;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.slack = slack;
    }
    ok = ok && ratio <= rep.bound + slack;
    ++rep.pairs;
  }
  rep.pass = ok;
  return rep;
}

}  // namespace mmlab
