#include "mmlab/sampler.hpp"

#include "mmlab/format.hpp"
#include "mmlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace mmlab {

void validate(const SamplerConfig& cfg) {
  if (!(cfg.step > 0)) throw std::invalid_argument("sampler: step must be positive");
  if (cfg.step >= 2) throw std::invalid_argument("sampler: step * C must stay below 2");
  if (cfg.burn_in < 0 || cfg.thin < 1 || cfg.chains < 1 || cfg.samples < 1 || cfg.max_iterations < 1)
    throw std::invalid_argument("sampler: burn-in, thinning, chain count and sample count must be positive");
  if (!(cfg.accept_low > 0 && cfg.accept_low < cfg.accept_high && cfg.accept_high < 1))
    throw std::invalid_argument("sampler: acceptance band must lie inside (0,1)");
}

Target joint_target(const PotentialSpec& V, int n) {
  Target t;
  t.potential = V.potential;
  for (int j = 0; j < V.nvars(); ++j) t.free.push_back(j);
  t.base = MatrixTuple(V.nvars(), n);
  t.curvature = V.window.C;
  return t;
}

Target conditional_target(const PotentialSpec& V, const MatrixTuple& y) {
  if (y.size() != V.n) throw std::invalid_argument("conditional_target: y has the wrong number of matrices");
  Target t;
  t.potential = V.potential;
  t.free = block_indices(V, Block::X);
  t.base = concat(MatrixTuple(V.m, y.dim()), y);
  t.curvature = V.window.C;
  return t;
}

Mala::Mala(const Target& target, MatrixTuple start, double step, std::uint64_t seed)
    : target_(target), x_(std::move(start)), step_(step), rng_(seed) {
  for (int v : target_.free)
    anchored_.push_back(target_.anchor_weight > 0 &&
                        std::find(target_.anchored.begin(), target_.anchored.end(), v) != target_.anchored.end());
  u_ = energy(x_, gv_, gu_);
}

double Mala::energy(const MatrixTuple& x, MatrixTuple& gv, MatrixTuple& gu) const {
  double u = target_.potential.value_and_grad(x, target_.free, gv);
  gu = gv;
  if (target_.anchor_weight > 0) {
    const double w = target_.anchor_weight;
    for (std::size_t a = 0; a < target_.anchored.size(); ++a) {
      const int var = target_.anchored[a];
      Matrix d = x[var] - target_.anchor[int(a)];
      u += 0.5 * w * d.squaredNorm() / x.dim();
      for (std::size_t i = 0; i < target_.free.size(); ++i)
        if (target_.free[i] == var) gu[int(i)] += w * d;
    }
  }
  return u;
}

bool Mala::step() {
  const int n = x_.dim();
  const double n2 = double(n) * double(n);
  const double plain = step_ / target_.curvature;
  const double held = step_ / (target_.curvature + target_.anchor_weight);
  MatrixTuple y = x_;
  for (std::size_t i = 0; i < target_.free.size(); ++i) {
    const double delta = anchored_[i] ? held : plain;
    Matrix& yi = y[target_.free[i]];
    yi += -0.5 * delta * gu_[int(i)] + std::sqrt(delta) * gue(rng_, n);
    yi = (0.5 * (yi + yi.adjoint())).eval();
  }
  MatrixTuple gv, gu;
  const double uy = energy(y, gv, gu);
  double transition = 0;
  for (std::size_t i = 0; i < target_.free.size(); ++i) {
    const int v = target_.free[i];
    const double delta = anchored_[i] ? held : plain;
    const double fwd = (y[v] - x_[v] + 0.5 * delta * gu_[int(i)]).squaredNorm();
    const double bwd = (x_[v] - y[v] + 0.5 * delta * gu[int(i)]).squaredNorm();
    transition += (bwd - fwd) / (2 * delta * n);
  }
  const double log_alpha = -n2 * (uy - u_) - n2 * transition;
  last_alpha_ = log_alpha >= 0 ? 1.0 : std::exp(log_alpha);
  if (std::isfinite(log_alpha) && std::log(rng_.uniform()) < log_alpha) {
    x_ = std::move(y);
    gv_ = std::move(gv);
    gu_ = std::move(gu);
    u_ = uy;
    return true;
  }
  return false;
}

void Mala::adapt(double target_rate, long k) {
  const double gain = 1.0 / std::pow(double(k) + 10.0, 0.6);
  step_ *= std::exp(gain * (last_alpha_ - target_rate));
  step_ = std::min(step_, 4.0);
}

std::size_t SampleChain::size() const {
  std::size_t s = 0;
  for (const auto& c : chains) s += c.size();
  return s;
}

std::vector<MatrixTuple> SampleChain::spread(int count) const {
  if (count < 1 || chains.empty()) throw std::invalid_argument("spread: need a positive count and a chain");
  std::vector<MatrixTuple> out;
  const std::size_t k = chains.size();
  const std::size_t per = (std::size_t(count) + k - 1) / k;
  for (int i = 0; i < count; ++i) {
    const auto& c = chains[std::size_t(i) % k];
    if (c.empty()) throw std::invalid_argument("spread: empty chain");
    const std::size_t j = std::size_t(i) / k;
    const std::size_t pos = (j * c.size()) / per + c.size() / (2 * per);
    out.push_back(c[std::min(pos, c.size() - 1)]);
  }
  return out;
}

double SampleChain::mean_acceptance() const { return mean_of(acceptance); }

SampleChain sample(const Target& target, const SamplerConfig& cfg) { return sample(target, cfg, target.base); }

SampleChain sample(const Target& target, const SamplerConfig& cfg, const MatrixTuple& start) {
  validate(cfg);
  if (start.size() != target.potential.nvars())
    throw std::invalid_argument("sample: start tuple does not match the potential");
  const long needed = long(cfg.burn_in) + long(cfg.samples) * cfg.thin;
  if (needed > cfg.max_iterations) throw std::invalid_argument("sample: burn-in plus samples exceed max_iterations");
  SampleChain out;
  out.n = start.dim();
  out.nvars = start.size();
  out.seed = cfg.seed;
  out.chains.resize(cfg.chains);
  out.acceptance.resize(cfg.chains);
  out.step.resize(cfg.chains);
  const double target_rate = 0.5 * (cfg.accept_low + cfg.accept_high);
  parallel_for(cfg.chains, [&](int c) {
    Mala mala(target, start, cfg.step, derive_seed(cfg.seed, std::uint64_t(c)));
    for (long k = 0; k < cfg.burn_in; ++k) {
      mala.step();
      if (cfg.tune) mala.adapt(target_rate, k);
    }
    long accepted = 0;
    auto& states = out.chains[c];
    states.reserve(cfg.samples);
    for (int s = 0; s < cfg.samples; ++s) {
      for (int t = 0; t < cfg.thin; ++t) accepted += mala.step();
      states.push_back(mala.state());
    }
    out.acceptance[c] = double(accepted) / double(long(cfg.samples) * cfg.thin);
    out.step[c] = mala.step_size();
  });
  if (cfg.enforce_band)
    for (int c = 0; c < cfg.chains; ++c)
      if (out.acceptance[c] < cfg.accept_low || out.acceptance[c] > cfg.accept_high) {
        std::ostringstream os;
        os << "sampler: chain " << c << " acceptance " << out.acceptance[c] << " outside [" << cfg.accept_low << ", "
           << cfg.accept_high << "] after tuning (step " << out.step[c] << ", N=" << out.n << ", burn-in " << cfg.burn_in
           << ")";
        throw SamplerError(os.str());
      }
  return out;
}

SampleChain sample(const PotentialSpec& V, int n, const SamplerConfig& cfg) {
  if (n < 1) throw std::invalid_argument("sample: N must be positive");
  Target t = joint_target(V, n);
  return sample(t, cfg);
}

TupleEstimate mean_tuple(const std::vector<std::vector<MatrixTuple>>& chains) {
  TupleEstimate out;
  const MatrixTuple* first = nullptr;
  for (const auto& c : chains)
    if (!c.empty()) {
      first = &c.front();
      break;
    }
  if (!first) throw std::invalid_argument("mean_tuple: no states");
  const int k = first->size(), n = first->dim();
  out.mean = MatrixTuple(k, n);
  double se2 = 0;
  std::vector<std::vector<double>> s(chains.size());
  for (int j = 0; j < k; ++j)
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b)
        for (int part = 0; part < (a == b ? 1 : 2); ++part) {
          for (std::size_t c = 0; c < chains.size(); ++c) {
            s[c].clear();
            for (const auto& x : chains[c]) s[c].push_back(part == 0 ? x[j](a, b).real() : x[j](a, b).imag());
          }
          const Estimate e = batch_means(s);
          if (part == 0) {
            out.mean[j](a, b) += e.mean;
            if (a != b) out.mean[j](b, a) += e.mean;
          } else {
            out.mean[j](a, b) += Complex(0, e.mean);
            out.mean[j](b, a) += Complex(0, -e.mean);
          }
          se2 += (a == b ? 1.0 : 2.0) * e.se * e.se;
        }
  out.se = std::sqrt(se2 / n);
  return out;
}

TupleEstimate marginal_grad(const PotentialSpec& V, const MatrixTuple& y, const SamplerConfig& cfg) {
  if (V.n == 0) throw std::invalid_argument("marginal_grad: potential has no y-block");
  const std::vector<int> yv = block_indices(V, Block::Y);
  if (V.m == 0) {
    MatrixTuple g = V.potential.grad(y, yv);
    return {g, 0.0};
  }
  Target t = conditional_target(V, y);
  SampleChain chain = sample(t, cfg);
  std::vector<std::vector<MatrixTuple>> grads(chain.chains.size());
  for (std::size_t c = 0; c < chain.chains.size(); ++c)
    for (const auto& x : chain.chains[c]) grads[c].push_back(V.potential.grad(x, yv));
  return mean_tuple(grads);
}

const MomentEntry* MomentTable::find(const Word& w) const {
  for (const auto& e : entries)
    if (e.word == w) return &e;
  return nullptr;
}

MomentTable estimate_moments(const SampleChain& chain, const std::vector<Word>& words) {
  MomentTable t;
  t.n = chain.n;
  t.seed = chain.seed;
  for (const Word& w : words) {
    for (int l : w)
      if (l < 0 || l >= chain.nvars) throw std::invalid_argument("estimate_moments: word uses a missing variable");
    MomentEntry e;
    e.word = w;
    if (w.empty()) {
      e.value = 1.0;
      t.entries.push_back(e);
      continue;
    }
    std::vector<std::vector<double>> re(chain.chains.size()), im(chain.chains.size());
    for (std::size_t c = 0; c < chain.chains.size(); ++c)
      for (const auto& x : chain.chains[c]) {
        WordEvaluator<double> ev(x);
        const Complex v = ev.trace(w);
        re[c].push_back(v.real());
        im[c].push_back(v.imag());
      }
    const Estimate er = batch_means(re), ei = batch_means(im);
    e.value = Complex(er.mean, ei.mean);
    e.se = std::hypot(er.se, ei.se);
    t.entries.push_back(e);
  }
  return t;
}

void write_csv(const MomentTable& t, std::ostream& os) {
  os << "word,re,im,se\n";
  for (const auto& e : t.entries)
    os << to_string(e.word) << ',' << fmt17(e.value.real()) << ',' << fmt17(e.value.imag()) << ',' << fmt17(e.se) << '\n';
}

std::string to_json(const MomentTable& t) {
  std::ostringstream os;
  os << "{\"N\":" << t.n << ",\"potential\":" << json_string(t.potential) << ",\"seed\":" << t.seed << ",\"moments\":[";
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    const auto& e = t.entries[i];
    os << (i ? "," : "") << "{\"word\":\"" << to_string(e.word) << "\",\"re\":" << fmt17(e.value.real())
       << ",\"im\":" << fmt17(e.value.imag()) << ",\"se\":" << fmt17(e.se) << "}";
  }
  os << "]}";
  return os.str();
}

SDResidual schwinger_dyson_residual(const SampleChain& chain, const PotentialSpec& V, const Word& p, int j) {
  if (j < 0 || j >= V.nvars()) throw std::out_of_range("schwinger_dyson_residual: variable index out of range");
  const BiWord dp = free_difference_quotient(p, j);
  std::vector<std::vector<double>> re(chain.chains.size()), im(chain.chains.size());
  for (std::size_t c = 0; c < chain.chains.size(); ++c)
    for (const auto& x : chain.chains[c]) {
      const Matrix g = V.potential.grad(x, {j})[0];
      WordEvaluator<double> ev(x);
      const Matrix& px = ev.product(p);
      const Complex lhs = (g.array() * px.transpose().array()).sum() / double(x.dim());
      const Complex r = lhs - evaluate_tau_tensor(dp, ev);
      re[c].push_back(r.real());
      im[c].push_back(r.imag());
    }
  return {batch_means(re), batch_means(im)};
}

namespace {

ConcentrationReport exceedance_table(const std::vector<std::vector<double>>& dev, const std::vector<double>& thresholds,
                                     const std::vector<double>& deltas, const std::vector<double>& bounds, double ess) {
  ConcentrationReport rep;
  std::size_t total = 0;
  for (const auto& c : dev) total += c.size();
  rep.ess = ess;
  const double n_eff = std::max(1.0, std::min(ess, double(total)));
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    std::size_t hits = 0;
    for (const auto& c : dev)
      for (double v : c) hits += v >= thresholds[k];
    ConcentrationRow row;
    row.delta = deltas[k];
    row.frequency = double(hits) / double(total);
    row.bound = bounds[k];
    const double b = std::min(1.0, bounds[k]);
    row.allowance = b + 2.576 * std::sqrt(b * (1 - b) / n_eff) + 1.0 / n_eff;
    row.ok = row.frequency <= row.allowance;
    if (!row.ok) ++rep.violations;
    rep.rows.push_back(row);
  }
  rep.pass = rep.violations == 0;
  return rep;
}

}  // namespace

ConcentrationReport herbst_check(const SampleChain& chain, const std::function<double(const MatrixTuple&)>& f, double K,
                                 double c, const std::vector<double>& deltas) {
  if (!(K > 0) || !(c > 0)) throw std::invalid_argument("herbst_check: K and c must be positive");
  auto vals = chain.series(f);
  const Estimate e = batch_means(vals);
  std::vector<std::vector<double>> dev = vals;
  for (auto& ch : dev)
    for (auto& v : ch) v -= e.mean;
  const double n2 = double(chain.n) * double(chain.n);
  std::vector<double> bounds;
  for (double d : deltas) bounds.push_back(std::exp(-c * n2 * d * d / (2 * K * K)));
  return exceedance_table(dev, deltas, deltas, bounds, e.ess);
}

double theta_constant() {
  const double s = std::sqrt(std::log(7.0));
  return 6.0 * s + 9.0 / (6.0 * s);
}

ConcentrationReport opnorm_concentration_check(const SampleChain& chain, double c, const std::vector<double>& deltas) {
  if (!(c > 0)) throw std::invalid_argument("opnorm_concentration_check: c must be positive");
  const TupleEstimate mean = mean_tuple(chain.chains);
  auto dev = chain.series([&](const MatrixTuple& x) { return opnorm(x - mean.mean); });
  const Estimate e = batch_means(dev);
  const double theta = theta_constant();
  std::vector<double> thresholds, bounds;
  for (double d : deltas) {
    thresholds.push_back((theta + d) / std::sqrt(c));
    bounds.push_back(std::exp(-double(chain.n) * d * d / 2));
  }
  return exceedance_table(dev, thresholds, deltas, bounds, e.ess);
}

MeanVarianceReport mean_variance_check(const SampleChain& chain, const PotentialSpec& V) {
  MeanVarianceReport rep;
  const int k = V.nvars();
  bool ok = true;
  for (int j = 0; j < k; ++j) {
    Estimate e = chain.estimate([&](const MatrixTuple& x) { return tau(V.potential.grad(x, {j})[0]).real(); });
    rep.mean_grad_trace.push_back(e);
    ok = ok && std::abs(e.mean) <= 4 * e.se + 1e-12;
  }
  const TupleEstimate mean = mean_tuple(chain.chains);
  rep.spread = chain.estimate([&](const MatrixTuple& x) { return norm2_squared(x - mean.mean); });
  rep.lower = k / V.window.C;
  rep.upper = k / V.window.c;
  ok = ok && rep.spread.mean >= rep.lower - 4 * rep.spread.se && rep.spread.mean <= rep.upper + 4 * rep.spread.se;
  for (int j = 0; j < k; ++j) {
    Matrix d = mean.mean[j];
    d.diagonal().array() -= tau(mean.mean[j]);
    rep.scalar_mean_defect = std::max(rep.scalar_mean_defect, std::sqrt(d.squaredNorm() / d.rows()));
  }
  rep.pass = ok;
  return rep;
}

}  // namespace mmlab
