#include "mmlab/entropy.hpp"

#include "mmlab/format.hpp"
#include "mmlab/parallel.hpp"
#include "mmlab/random.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace mmlab {

namespace {

struct PointValues {
  double fisher = 0;  // I at raw time t
  double j = 0;       // 2 <x~, U> + <U_a, U_b>
  double ug = 0;      // <U_a, U_b>
};

// Per-sample score quantities at raw time t for one state of the model law.
PointValues score_point(const EvolvedPotential& ep, const MatrixTuple& state, double t, std::uint64_t seed) {
  const Roles& roles = ep.model.roles;
  const MatrixTuple x = select(state, roles.active);
  const MatrixTuple y = select(state, roles.given);
  PointValues v;
  if (t == 0) {
    EvolvedPotential raw = ep;
    raw.mode = TimeMode::Raw;
    const EvolvedGrad g = evolved_grad(raw, 0, x, y, seed);
    v.ug = inner(g.u_a, g.u_b);
    v.j = 2 * inner(x, g.u_mean) + v.ug;
    v.fisher = norm2_squared(x) + v.j;
    return v;
  }
  Rng rng(derive_seed(seed, 0x5eedULL));
  MatrixTuple xt = x;
  xt.axpy(std::sqrt(t), gue_tuple(rng, x.size(), x.dim()));
  const EvolvedGrad g = conditional_score_shift(ep, t, xt, y, derive_seed(seed, 1));
  v.ug = inner(g.u_a, g.u_b);
  v.j = 2 * inner(xt, g.u_mean) + v.ug;
  v.fisher = (norm2_squared(xt) + v.j) / ((1 + t) * (1 + t));
  return v;
}

std::vector<const MatrixTuple*> flatten(const SampleChain& chain) {
  std::vector<const MatrixTuple*> out;
  const std::size_t len = chain.chains.empty() ? 0 : chain.chains.front().size();
  for (std::size_t i = 0; i < len; ++i)
    for (const auto& c : chain.chains)
      if (i < c.size()) out.push_back(&c[i]);
  return out;
}

std::vector<PointValues> grid_values(const EvolvedPotential& ep, const std::vector<const MatrixTuple*>& states,
                                     int offset, int points, double t, std::uint64_t seed) {
  std::vector<PointValues> vals(points);
  const std::size_t total = states.size();
  parallel_for(points, [&](int i) {
    const std::size_t idx = (std::size_t(offset) + std::size_t(i) * std::max<std::size_t>(1, total / points)) % total;
    vals[i] = score_point(ep, *states[idx], t, derive_seed(seed, std::uint64_t(i)));
  });
  return vals;
}

Estimate of(const std::vector<PointValues>& v, double PointValues::*field, double scale = 1) {
  std::vector<double> s;
  for (const auto& p : v) s.push_back(scale * (p.*field));
  return iid_estimate(s);
}

EvolvedPotential at_time(const Model& model, const EntropyConfig& cfg, double s) {
  EvolvedPotential ep{model, TimeMode::Raw, cfg.inner};
  ep.inner.samples = std::max(cfg.inner_min, int(std::lround(cfg.inner.samples * std::exp(-s / 2))));
  ep.inner.samples = std::min(ep.inner.samples, cfg.inner.samples);
  return ep;
}

void check_config(const EntropyConfig& cfg) {
  if (cfg.grid < 3 || cfg.grid % 2 == 0) throw std::invalid_argument("entropy: grid must be odd and >= 3");
  if (!(cfg.s_max > 0) || cfg.points < 2 || cfg.n < 1 || cfg.inner_min < 2)
    throw std::invalid_argument("entropy: invalid quadrature configuration");
}

SampleChain model_chain(const Model& model, const EntropyConfig& cfg) {
  return sample(model.spec, cfg.n, cfg.outer);
}

Estimate second_moment(const SampleChain& chain, const std::vector<int>& active) {
  return chain.estimate([&](const MatrixTuple& x) { return norm2_squared(select(x, active)); });
}

// Trapezoid on the full grid and on every other node; returns the Richardson value.
void integrate(std::vector<GridPoint>& grid, double& value, double& se, double& err) {
  const int K = int(grid.size());
  const double h = grid[1].s - grid[0].s;
  double th = 0, t2h = 0, s2 = 0;
  for (int k = 0; k < K; ++k) {
    const double wh = (k == 0 || k == K - 1) ? h / 2 : h;
    const double w2h = k % 2 ? 0.0 : ((k == 0 || k == K - 1) ? h : 2 * h);
    th += wh * grid[k].value;
    t2h += w2h * grid[k].value;
    const double w = (4 * wh - w2h) / 3;
    s2 += w * w * grid[k].se * grid[k].se;
  }
  value = (4 * th - t2h) / 3;
  err = std::abs(th - t2h) / 3;
  se = std::sqrt(s2);
}

EntropyQuadrature quadrature(const Model& model, const EntropyConfig& cfg, bool gaussian) {
  check_config(cfg);
  EntropyQuadrature q;
  q.kind = gaussian ? "h_g" : "h";
  q.m = int(model.roles.active.size());
  if (q.m == 0) throw std::invalid_argument("entropy: model has no active variables");
  const SampleChain chain = model_chain(model, cfg);
  const auto states = flatten(chain);
  const Estimate m2 = second_moment(chain, model.roles.active);
  q.second_moment = m2.mean;
  q.second_moment_se = m2.se;
  const std::uint64_t base = derive_seed(cfg.seed, gaussian ? 0x67ULL : 0x68ULL);
  for (int k = 0; k < cfg.grid; ++k) {
    GridPoint g;
    g.s = cfg.s_max * k / (cfg.grid - 1);
    g.t = std::expm1(g.s);
    const auto vals = grid_values(at_time(model, cfg, g.s), states, k, cfg.points, g.t, derive_seed(base, k));
    const Estimate e = of(vals, gaussian ? &PointValues::ug : &PointValues::j, std::exp(-g.s));
    g.value = e.mean;
    g.se = e.se;
    const Estimate f = gaussian ? e : of(vals, &PointValues::fisher);
    g.fisher = ScoreEstimate{g.s, f.mean, f.se, gaussian ? FisherMode::Gaussian : FisherMode::Raw};
    if (!gaussian) g.fisher.t = g.t;
    q.grid.push_back(g);
  }
  double area = 0, area_se = 0;
  integrate(q.grid, area, area_se, q.quadrature_error);
  const double T = std::expm1(cfg.s_max);
  const double m = q.m;
  if (gaussian) {
    // I_g(s) <= e^{-s} I_g(0) bounds the tail beyond s_max.
    q.tail_low = -0.5 * std::exp(-cfg.s_max) * std::max(0.0, q.grid.front().value);
    q.tail_high = 0;
    q.value = -0.5 * area + 0.5 * (q.tail_low + q.tail_high);
    q.mc_se = 0.5 * area_se;
    q.quadrature_error *= 0.5;
  } else {
    const double a = q.second_moment / m;
    const double lo = -0.5 * m * std::log1p(1 / T);
    const double hi = 0.5 * m * std::log((a + T) / (1 + T));
    q.tail_low = std::min(lo, hi);
    q.tail_high = std::max(lo, hi);
    const double frac = 1 - 1 / (1 + T);
    q.value = 0.5 * m * std::log(2 * std::numbers::pi * std::numbers::e) + 0.5 * (m - q.second_moment) * frac -
              0.5 * area + 0.5 * (q.tail_low + q.tail_high);
    q.mc_se = std::hypot(0.5 * area_se, 0.5 * frac * q.second_moment_se);
    q.quadrature_error *= 0.5;
  }
  q.budget = 4 * q.mc_se + q.quadrature_error + 0.5 * (q.tail_high - q.tail_low);
  return q;
}

}  // namespace

ScoreEstimate fisher(const EvolvedPotential& ep, const SampleChain& chain, double t, FisherMode mode,
                     const EntropyConfig& cfg) {
  if (t < 0) throw std::invalid_argument("fisher: t must be nonnegative");
  const auto states = flatten(chain);
  if (states.empty()) throw std::invalid_argument("fisher: empty chain");
  const double raw = mode == FisherMode::Raw ? t : std::expm1(t);
  const std::uint64_t seed = derive_seed(cfg.seed, std::uint64_t(std::llround(t * 1e6)) + (mode == FisherMode::Raw ? 0 : 1ULL << 40));
  const auto vals = grid_values(ep, states, 0, cfg.points, raw, seed);
  const Estimate e = mode == FisherMode::Raw ? of(vals, &PointValues::fisher) : of(vals, &PointValues::ug, std::exp(-t));
  return ScoreEstimate{t, e.mean, e.se, mode};
}

EntropyQuadrature entropy(const Model& model, const EntropyConfig& cfg) { return quadrature(model, cfg, false); }

EntropyQuadrature entropy_g(const Model& model, const EntropyConfig& cfg) { return quadrature(model, cfg, true); }

double gaussian_relative(double h, double second_moment, int m) {
  return h - 0.5 * second_moment - 0.5 * m * std::log(2 * std::numbers::pi);
}

SandwichReport fisher_sandwich_check(const Model& model, const std::vector<double>& times, const EntropyConfig& cfg) {
  const SampleChain chain = model_chain(model, cfg);
  const int m = int(model.roles.active.size());
  const double a = second_moment(chain, model.roles.active).mean / m;
  EvolvedPotential ep{model, TimeMode::Raw, cfg.inner};
  const ScoreEstimate i0 = fisher(ep, chain, 0, FisherMode::Raw, cfg);
  SandwichReport rep;
  bool ok = true;
  for (double t : times) {
    SandwichRow row;
    row.fisher = t == 0 ? i0 : fisher(ep, chain, t, FisherMode::Raw, cfg);
    row.lower = m / (a + t);
    row.upper = t > 0 ? std::min(m / t, i0.value) : i0.value;
    const double up_se = (t > 0 && m / t <= i0.value) ? row.fisher.se : std::hypot(row.fisher.se, i0.se);
    row.ok = row.fisher.value >= row.lower - 4 * row.fisher.se && row.fisher.value <= row.upper + 4 * up_se;
    ok = ok && row.ok;
    if (!rep.rows.empty()) {
      const auto& prev = rep.rows.back().fisher;
      if (row.fisher.value > prev.value + 4 * std::hypot(prev.se, row.fisher.se)) rep.monotone = false;
    }
    rep.rows.push_back(row);
  }
  rep.pass = ok && rep.monotone;
  return rep;
}

ScalingReport fisher_scaling_check(const PotentialSpec& V, const SampleChain& chain, double scale) {
  if (!(scale > 0)) throw std::invalid_argument("fisher_scaling_check: scale must be positive");
  const int k = V.nvars();
  const Potential scaled = Potential::linear_image(V.potential, scale * Eigen::MatrixXd::Identity(k, k));
  const std::vector<int> xs = block_indices(V, Block::X);
  ScalingReport rep;
  rep.scale = scale;
  double a = 0, b = 0;
  std::size_t count = 0;
  for (const auto& c : chain.chains)
    for (const auto& x : c) {
      const double g = norm2_squared(V.potential.grad(x, xs));
      const double gs = norm2_squared(scaled.grad(scale * x, xs));
      a += g;
      b += gs;
      ++count;
      if (g > 0) rep.max_relative_defect = std::max(rep.max_relative_defect, std::abs(gs * scale * scale / g - 1));
    }
  rep.fisher = a / double(count);
  rep.fisher_scaled = b / double(count);
  const double total = std::abs(rep.fisher_scaled * scale * scale / rep.fisher - 1);
  rep.pass = rep.max_relative_defect < 1e-10 && total < 1e-10;
  return rep;
}

LsiReport lsi_check(const Model& model, const EntropyConfig& cfg) {
  LsiReport rep;
  rep.h_g = entropy_g(model, cfg);
  const GridPoint& g0 = rep.h_g.grid.front();
  rep.fisher_g = ScoreEstimate{0, g0.value, g0.se, FisherMode::Gaussian};
  rep.slack = 0.5 * rep.fisher_g.value - std::abs(rep.h_g.value);
  rep.allowance = rep.h_g.budget + 2 * rep.fisher_g.se;
  rep.pass = rep.slack >= -rep.allowance;
  return rep;
}

AdditivityReport entropy_additivity_check(const PotentialSpec& V, const EntropyConfig& cfg) {
  if (V.m == 0 || V.n == 0) throw std::invalid_argument("entropy_additivity_check: need both x and y blocks");
  const std::vector<int> xs = block_indices(V, Block::X), ys = block_indices(V, Block::Y);
  Model joint{V, {block_indices(V, Block::All), {}, {}}};
  Model conditional = default_model(V);
  Model marginal{V, {ys, {}, xs}};
  EntropyConfig c = cfg;
  AdditivityReport rep;
  c.seed = derive_seed(cfg.seed, 1);
  rep.joint = entropy(joint, c);
  c.seed = derive_seed(cfg.seed, 2);
  rep.conditional = entropy(conditional, c);
  c.seed = derive_seed(cfg.seed, 3);
  rep.marginal = entropy(marginal, c);
  rep.defect = rep.joint.value - rep.conditional.value - rep.marginal.value;
  rep.allowance = rep.joint.budget + rep.conditional.budget + rep.marginal.budget;
  rep.pass = std::abs(rep.defect) <= rep.allowance;
  return rep;
}

void write_grid_csv(const EntropyQuadrature& q, std::ostream& os) {
  os << "s,t,integrand,se,fisher,fisher_se\n";
  for (const auto& g : q.grid)
    os << fmt17(g.s) << ',' << fmt17(g.t) << ',' << fmt17(g.value) << ',' << fmt17(g.se) << ','
       << fmt17(g.fisher.value) << ',' << fmt17(g.fisher.se) << '\n';
}

std::string to_json(const EntropyQuadrature& q) {
  std::ostringstream os;
  os << "{\"kind\":" << json_string(q.kind) << ",\"m\":" << q.m << ",\"value\":" << fmt17(q.value)
     << ",\"budget\":" << fmt17(q.budget) << ",\"mc_se\":" << fmt17(q.mc_se)
     << ",\"quadrature_error\":" << fmt17(q.quadrature_error) << ",\"tail\":[" << fmt17(q.tail_low) << ','
     << fmt17(q.tail_high) << "],\"second_moment\":" << fmt17(q.second_moment)
     << ",\"second_moment_se\":" << fmt17(q.second_moment_se) << ",\"grid_points\":" << q.grid.size() << "}";
  return os.str();
}

}  // namespace mmlab
