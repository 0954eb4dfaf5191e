#pragma once

#include "mmlab/potential.hpp"
#include "mmlab/random.hpp"
#include "mmlab/stats.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmlab {

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solve or an error budget did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SamplerConfig {
  // Step in units of 1/C: the Langevin step is delta = step / C_eff.
  double step = 0.5;
  int burn_in = 1000;
  int thin = 1;
  int chains = 4;
  int samples = 1000;  // retained states per chain
  std::uint64_t seed = 1;
  long max_iterations = 100000000;
  double accept_low = 0.5;
  double accept_high = 0.7;
  bool tune = true;
  bool enforce_band = true;
};

void validate(const SamplerConfig& cfg);

// Density proportional to exp(-N^2 [V(x) + (w/2) sum_a ||x_a - c_a||_2^2]) in the
// free variables, with the remaining variables of `base` held fixed. Anchored
// variables move with step / (curvature + w), the others with step / curvature.
struct Target {
  Potential potential;
  std::vector<int> free;
  MatrixTuple base;
  std::vector<int> anchored;  // subset of free
  MatrixTuple anchor;         // one matrix per anchored variable
  double anchor_weight = 0;
  double curvature = 1;  // upper Hessian bound used to scale the step
};

Target joint_target(const PotentialSpec& V, int n);
// x-block free, y-block fixed at y.
Target conditional_target(const PotentialSpec& V, const MatrixTuple& y);

// One Metropolis-adjusted Langevin chain.
class Mala {
 public:
  Mala(const Target& target, MatrixTuple start, double step, std::uint64_t seed);

  // One proposal; returns true if accepted.
  bool step();
  // Robbins-Monro update of the step toward the acceptance target.
  void adapt(double target_rate, long k);

  const MatrixTuple& state() const { return x_; }
  // Gradient of V (without the anchor term) at the state, free variables only.
  const MatrixTuple& potential_grad() const { return gv_; }
  double step_size() const { return step_; }
  double last_accept_prob() const { return last_alpha_; }

 private:
  double energy(const MatrixTuple& x, MatrixTuple& gv, MatrixTuple& gu) const;

  const Target& target_;
  std::vector<char> anchored_;  // per free variable
  MatrixTuple x_;
  MatrixTuple gv_;
  MatrixTuple gu_;
  double u_ = 0;
  double step_;
  double last_alpha_ = 0;
  Rng rng_;
};

struct SampleChain {
  int n = 0;
  int nvars = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<MatrixTuple>> chains;
  std::vector<double> acceptance;
  std::vector<double> step;

  std::size_t size() const;
  double mean_acceptance() const;
  // `count` states evenly spaced along the chains, alternating between chains.
  std::vector<MatrixTuple> spread(int count) const;
  template <class F>
  std::vector<std::vector<double>> series(F&& f) const {
    std::vector<std::vector<double>> out(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) {
      out[c].reserve(chains[c].size());
      for (const auto& x : chains[c]) out[c].push_back(f(x));
    }
    return out;
  }
  template <class F>
  Estimate estimate(F&& f) const {
    return batch_means(series(f));
  }
};

SampleChain sample(const Target& target, const SamplerConfig& cfg);
SampleChain sample(const Target& target, const SamplerConfig& cfg, const MatrixTuple& start);
// Joint law of all variables of V at size N.
SampleChain sample(const PotentialSpec& V, int n, const SamplerConfig& cfg);

// Mean matrix tuple with its standard error measured in ||.||_2.
struct TupleEstimate {
  MatrixTuple mean;
  double se = 0;
};

TupleEstimate mean_tuple(const std::vector<std::vector<MatrixTuple>>& chains);

// E[D_y V(X, y) | y] over X ~ exp(-N^2 V(., y)).
TupleEstimate marginal_grad(const PotentialSpec& V, const MatrixTuple& y, const SamplerConfig& cfg);

struct MomentEntry {
  Word word;
  Complex value;
  double se = 0;
};

struct MomentTable {
  int n = 0;
  std::string potential;
  std::uint64_t seed = 0;
  std::vector<MomentEntry> entries;

  const MomentEntry* find(const Word& w) const;
};

MomentTable estimate_moments(const SampleChain& chain, const std::vector<Word>& words);
void write_csv(const MomentTable& t, std::ostream& os);
std::string to_json(const MomentTable& t);

struct SDResidual {
  Estimate re;
  Estimate im;
};

// E tau(D_j V(X) p(X)) - E (tau (x) tau)(d_j p (X)).
SDResidual schwinger_dyson_residual(const SampleChain& chain, const PotentialSpec& V, const Word& p, int j);

struct ConcentrationRow {
  double delta = 0;
  double frequency = 0;
  double bound = 0;
  double allowance = 0;  // bound plus the binomial 99% band
  bool ok = true;
};

struct ConcentrationReport {
  std::vector<ConcentrationRow> rows;
  int violations = 0;
  double ess = 0;
  bool pass = true;
};

// P(f(X) - E f >= delta) <= exp(-c N^2 delta^2 / (2 K^2)).
ConcentrationReport herbst_check(const SampleChain& chain, const std::function<double(const MatrixTuple&)>& f, double K,
                                 double c, const std::vector<double>& deltas);

double theta_constant();

// P(||X - E X||_inf >= c^{-1/2}(Theta + delta)) <= exp(-N delta^2 / 2).
ConcentrationReport opnorm_concentration_check(const SampleChain& chain, double c, const std::vector<double>& deltas);

struct MeanVarianceReport {
  std::vector<Estimate> mean_grad_trace;  // tau(D_j V) per variable
  Estimate spread;                        // E ||X - E X||_2^2
  double lower = 0;                       // m / C
  double upper = 0;                       // m / c
  double scalar_mean_defect = 0;          // ||E X_j - tau(E X_j) I||_2, max over j
  bool pass = false;
};

MeanVarianceReport mean_variance_check(const SampleChain& chain, const PotentialSpec& V);

}  // namespace mmlab
