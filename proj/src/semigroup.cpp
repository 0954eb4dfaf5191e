#include "mmlab/semigroup.hpp"

#include "mmlab/random.hpp"

#include <cmath>
#include <sstream>

namespace mmlab {

double qt_damping(double t, double c, double C) {
  if (t * C < 1) return 1.0;
  if (t * C < 3) return 0.5;
  return 2.0 / (2.0 + t * (c + C));
}

QtResult inf_convolve(const PotentialSpec& u, double t, const MatrixTuple& x, const MatrixTuple& y,
                      const QtConfig& cfg) {
  if (t < 0) throw std::invalid_argument("inf_convolve: t must be nonnegative");
  if (x.size() != u.m || y.size() != u.n)
    throw std::invalid_argument("inf_convolve: block sizes do not match the potential");
  const std::vector<int> xs = block_indices(u, Block::X);
  QtResult r;
  r.damping = qt_damping(t, u.window.c, u.window.C);
  MatrixTuple z = x;
  MatrixTuple full = concat(z, y);
  if (t == 0) {
    r.minimizer = z;
    r.value = u.potential.value(full);
    r.grad = u.potential.grad(full);
    return r;
  }
  for (r.iterations = 0; r.iterations < cfg.max_iterations; ++r.iterations) {
    full = concat(z, y);
    MatrixTuple target = x;
    target.axpy(-t, u.potential.grad(full, xs));
    r.residual = norm2(z - target);
    if (r.residual <= cfg.tol) break;
    z *= 1 - r.damping;
    z.axpy(r.damping, target);
  }
  if (r.residual > cfg.tol) {
    std::ostringstream os;
    os << "inf_convolve: no convergence after " << cfg.max_iterations << " iterations (residual " << r.residual
       << ", t*C = " << t * u.window.C << ")";
    throw ConvergenceError(os.str());
  }
  r.minimizer = z;
  r.value = u.potential.value(full) + norm2_squared(z - x) / (2 * t);
  r.grad = u.potential.grad(full);
  return r;
}

Estimate gaussian_smooth(const std::function<double(const MatrixTuple&)>& f, const MatrixTuple& x, double t,
                         int pairs, std::uint64_t seed) {
  if (t < 0 || pairs < 2) throw std::invalid_argument("gaussian_smooth: need t >= 0 and at least two pairs");
  std::vector<double> vals(pairs);
  for (int p = 0; p < pairs; ++p) {
    Rng rng(derive_seed(seed, std::uint64_t(p)));
    const MatrixTuple z = gue_tuple(rng, x.size(), x.dim(), t);
    vals[p] = 0.5 * (f(x + z) + f(x - z));
  }
  return iid_estimate(vals);
}

double trotter_value_bound(double C, int m, double t, int level, double grad_norm_squared) {
  return (1.5 * C * C * m * t / (1 + C * t) + std::log1p(C * t) * (m + C * m + grad_norm_squared)) *
         std::ldexp(1.0, -level);
}

double trotter_grad_bound(double C, int m, double t, int level) {
  const double h = std::ldexp(1.0, -level);
  return (t / 2 + C * (t / 2) * (t / 2)) * C * C * std::sqrt(double(m)) * (2 * std::sqrt(h) + h * std::sqrt(h) * C);
}

double time_continuity_bound(double C, int m, double dt, double grad_norm) {
  return 5 * C * std::sqrt(2.0 * m * dt) + C * dt * grad_norm;
}

namespace {

struct Trotter {
  const PotentialSpec& u;
  const MatrixTuple& y;
  const TrotterConfig& cfg;
  std::vector<int> xs;
  double h;
  int steps;

  struct Value {
    double value;
    MatrixTuple grad;
  };

  // u_k = (P_h Q_h)^k u at (x, y), with the noise drawn from the subtree `node`.
  Value eval(int k, const MatrixTuple& x, std::uint64_t node, std::vector<Value>* per_pair = nullptr) const {
    if (k == 0) {
      Value v;
      v.value = u.potential.value_and_grad(concat(x, y), xs, v.grad);
      return v;
    }
    const int pairs = k == steps ? cfg.outer_samples : cfg.inner_samples;
    const double j = k - 1;
    const double theta = qt_damping(h, u.window.c / (1 + u.window.c * j * h), u.window.C / (1 + u.window.C * j * h));
    Value total{0.0, MatrixTuple(x.size(), x.dim())};
    for (int p = 0; p < pairs; ++p) {
      Rng rng(derive_seed(node, std::uint64_t(2 * p)));
      const MatrixTuple z = gue_tuple(rng, x.size(), x.dim(), h);
      Value pair{0.0, MatrixTuple(x.size(), x.dim())};
      for (int s = 0; s < 2; ++s) {
        const MatrixTuple point = s == 0 ? x + z : x - z;
        const std::uint64_t child = derive_seed(node, std::uint64_t(2 * p + 1) + 1000003ULL * std::uint64_t(s + 1));
        MatrixTuple w = point;
        Value inner;
        int it = 0;
        for (;; ++it) {
          inner = eval(k - 1, w, child);
          MatrixTuple target = point;
          target.axpy(-h, inner.grad);
          if (norm2(w - target) <= cfg.qt.tol) break;
          if (it >= cfg.qt.max_iterations)
            throw ConvergenceError("trotter_R: proximal step did not converge at level " + std::to_string(k));
          w *= 1 - theta;
          w.axpy(theta, target);
        }
        pair.value += 0.5 * (inner.value + norm2_squared(w - point) / (2 * h));
        pair.grad.axpy(0.5, inner.grad);
      }
      if (per_pair) per_pair->push_back(pair);
      total.value += pair.value / pairs;
      total.grad.axpy(1.0 / pairs, pair.grad);
    }
    return total;
  }
};

}  // namespace

TrotterResult trotter_R(const PotentialSpec& u, double t, int level, const MatrixTuple& x, const MatrixTuple& y,
                        const TrotterConfig& cfg) {
  if (x.size() != u.m || y.size() != u.n) throw std::invalid_argument("trotter_R: block sizes do not match");
  if (t < 0) throw std::invalid_argument("trotter_R: t must be nonnegative");
  const double h = std::ldexp(1.0, -level);
  const double k = t / h;
  if (std::abs(k - std::round(k)) > 1e-12) throw std::invalid_argument("trotter_R: t must be a multiple of 2^-level");
  if (h * u.window.C / 2 > 1) throw std::invalid_argument("trotter_R: need 2^{-level-1} C <= 1");
  if (cfg.outer_samples < 2 || cfg.inner_samples < 1) throw std::invalid_argument("trotter_R: sample counts too small");
  Trotter tr{u, y, cfg, block_indices(u, Block::X), h, int(std::round(k))};
  TrotterResult r;
  r.steps = tr.steps;
  MatrixTuple gx = u.potential.grad(concat(x, y), tr.xs);
  r.value_bound = trotter_value_bound(u.window.C, u.m, t, level, norm2_squared(gx));
  r.grad_bound = trotter_grad_bound(u.window.C, u.m, t, level);
  if (tr.steps == 0) {
    MatrixTuple zero(u.m, x.dim());
    r.value = u.potential.value(concat(x, y)) - u.potential.value(concat(zero, y));
    r.offset = u.potential.value(concat(zero, y));
    r.grad = gx;
    return r;
  }
  std::vector<Trotter::Value> at_x, at_0;
  const auto vx = tr.eval(tr.steps, x, cfg.seed, &at_x);
  const auto v0 = tr.eval(tr.steps, MatrixTuple(u.m, x.dim()), cfg.seed, &at_0);
  std::vector<double> diff;
  for (std::size_t p = 0; p < at_x.size(); ++p) diff.push_back(at_x[p].value - at_0[p].value);
  const Estimate d = iid_estimate(diff);
  r.value = d.mean;
  r.value_se = d.se;
  r.offset = v0.value;
  r.grad = vx.grad;
  double ss = 0;
  for (const auto& v : at_x) ss += norm2_squared(v.grad - vx.grad);
  const double P = double(at_x.size());
  r.grad_se = std::sqrt(ss / (P * (P - 1)));
  return r;
}

EvolvedPotential evolved(const PotentialSpec& V, TimeMode mode, InnerConfig inner) {
  return EvolvedPotential{default_model(V), mode, inner};
}

MatrixTuple assemble(const Roles& roles, const MatrixTuple& active, const MatrixTuple& given,
                     const MatrixTuple& hidden) {
  if (active.size() != int(roles.active.size()) || given.size() != int(roles.given.size()) ||
      hidden.size() != int(roles.hidden.size()))
    throw std::invalid_argument("assemble: block sizes do not match the roles");
  const int n = active.size() ? active.dim() : given.size() ? given.dim() : hidden.dim();
  MatrixTuple out(int(roles.active.size() + roles.given.size() + roles.hidden.size()), n);
  scatter(out, roles.active, active);
  scatter(out, roles.given, given);
  scatter(out, roles.hidden, hidden);
  return out;
}

namespace {

void validate_inner(const InnerConfig& c) {
  if (c.chains < 2 || c.chains % 2 != 0) throw std::invalid_argument("evolved_grad: inner chain count must be even");
  if (c.samples < 2 || c.burn_in < 0 || c.thin < 1 || !(c.step > 0) || c.descent_steps < 0)
    throw std::invalid_argument("evolved_grad: invalid inner sampler settings");
}

SamplerConfig inner_sampler(const InnerConfig& c, std::uint64_t seed) {
  SamplerConfig s;
  s.step = std::min(c.step, 1.9);
  s.burn_in = c.burn_in;
  s.thin = c.thin;
  s.chains = c.chains;
  s.samples = c.samples;
  s.seed = seed;
  s.enforce_band = false;
  return s;
}

// Mean of f over all chains, and over each half of the chains.
void split_means(const std::vector<std::vector<MatrixTuple>>& vals, EvolvedGrad& out, double& se) {
  const std::size_t K = vals.size();
  const TupleEstimate all = mean_tuple(vals);
  out.u_mean = all.mean;
  se = all.se;
  std::vector<std::vector<MatrixTuple>> a(vals.begin(), vals.begin() + K / 2), b(vals.begin() + K / 2, vals.end());
  out.u_a = mean_tuple(a).mean;
  out.u_b = mean_tuple(b).mean;
}

}  // namespace

EvolvedGrad conditional_score_shift(const EvolvedPotential& ep, double t, const MatrixTuple& xt,
                                    const MatrixTuple& y, std::uint64_t seed) {
  validate_inner(ep.inner);
  if (!(t > 0)) throw std::invalid_argument("conditional_score_shift: t must be positive");
  const PotentialSpec& V = ep.model.spec;
  const Roles& roles = ep.model.roles;
  const int n = xt.dim();
  Target target;
  target.potential = V.potential;
  target.free = roles.active;
  target.free.insert(target.free.end(), roles.hidden.begin(), roles.hidden.end());
  target.base = assemble(roles, xt, y, MatrixTuple(int(roles.hidden.size()), n));
  target.anchored = roles.active;
  target.anchor = xt;
  target.anchor_weight = 1 / t;
  target.curvature = V.window.C;

  const double w = target.anchor_weight;
  MatrixTuple z = target.base;
  scatter(z, roles.active, (1 / (1 + t)) * xt);
  const auto energy = [&](const MatrixTuple& p, MatrixTuple& g) {
    double e = V.potential.value_and_grad(p, target.free, g);
    for (std::size_t a = 0; a < roles.active.size(); ++a) {
      const Matrix d = p[roles.active[a]] - xt[int(a)];
      g[int(a)] += w * d;
      e += 0.5 * w * d.squaredNorm() / n;
    }
    return e;
  };
  double rate = 1 / (V.window.C + w);
  MatrixTuple g;
  double e = energy(z, g);
  for (int d = 0; d < ep.inner.descent_steps && rate > 1e-12; ++d) {
    MatrixTuple trial = z, gt;
    for (std::size_t i = 0; i < target.free.size(); ++i) trial[target.free[i]] -= rate * g[int(i)];
    const double et = energy(trial, gt);
    if (std::isfinite(et) && et <= e) {
      z = std::move(trial);
      g = std::move(gt);
      e = et;
    } else {
      rate /= 2;
    }
  }
  const SampleChain chain = sample(target, inner_sampler(ep.inner, seed), z);
  std::vector<std::vector<MatrixTuple>> u(chain.chains.size());
  for (std::size_t c = 0; c < chain.chains.size(); ++c)
    for (const auto& state : chain.chains[c])
      u[c].push_back(V.potential.grad(state, roles.active) - select(state, roles.active));
  EvolvedGrad out;
  split_means(u, out, out.se);
  out.acceptance = chain.mean_acceptance();
  return out;
}

namespace {

EvolvedGrad grad_at_zero(const EvolvedPotential& ep, const MatrixTuple& x, const MatrixTuple& y,
                         std::uint64_t seed) {
  const PotentialSpec& V = ep.model.spec;
  const Roles& roles = ep.model.roles;
  EvolvedGrad out;
  if (roles.hidden.empty()) {
    out.grad = V.potential.grad(assemble(roles, x, y, {}), roles.active);
    out.u_mean = out.grad - x;
    out.u_a = out.u_b = out.u_mean;
    return out;
  }
  validate_inner(ep.inner);
  Target target;
  target.potential = V.potential;
  target.free = roles.hidden;
  target.base = assemble(roles, x, y, MatrixTuple(int(roles.hidden.size()), x.dim()));
  target.curvature = V.window.C;
  const SampleChain chain = sample(target, inner_sampler(ep.inner, seed));
  std::vector<std::vector<MatrixTuple>> u(chain.chains.size());
  for (std::size_t c = 0; c < chain.chains.size(); ++c)
    for (const auto& state : chain.chains[c]) u[c].push_back(V.potential.grad(state, roles.active) - x);
  split_means(u, out, out.se);
  out.grad = x + out.u_mean;
  out.acceptance = chain.mean_acceptance();
  return out;
}

}  // namespace

EvolvedGrad evolved_grad(const EvolvedPotential& ep, double t, const MatrixTuple& x, const MatrixTuple& y,
                         std::uint64_t seed) {
  if (t < 0) throw std::invalid_argument("evolved_grad: t must be nonnegative");
  if (x.size() != int(ep.model.roles.active.size()) || y.size() != int(ep.model.roles.given.size()))
    throw std::invalid_argument("evolved_grad: block sizes do not match the model roles");
  if (t == 0) return grad_at_zero(ep, x, y, seed);
  if (ep.mode == TimeMode::Raw) {
    EvolvedGrad r = conditional_score_shift(ep, t, x, y, seed);
    r.grad = (1 / (1 + t)) * (x + r.u_mean);
    r.se /= 1 + t;
    return r;
  }
  const double raw = std::expm1(t);
  const double up = std::exp(t / 2);
  EvolvedGrad r = conditional_score_shift(ep, raw, up * x, y, seed);
  r.grad = x + (1 / up) * r.u_mean;
  r.se /= up;
  return r;
}

}  // namespace mmlab
