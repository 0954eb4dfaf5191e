#pragma once

#include "mmlab/potential.hpp"
#include "mmlab/sampler.hpp"

#include <cstdint>
#include <functional>

namespace mmlab {

struct OdeConfig {
  double step_factor = 0.5;  // h C <= step_factor
  long max_steps = 10000000;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FlowResult {
  MatrixTuple w;
  double t = 0;
  long steps = 0;
  double h = 0;
};

// dW/dt = -(1/2) D_x V(W, y), W_0 = x, classical four-stage Runge-Kutta.
FlowResult flow_W(const PotentialSpec& V, const MatrixTuple& x, const MatrixTuple& y, double t,
                  const OdeConfig& cfg = {});

// ||W_t(x) - W_t(x')||_2 / (e^{-ct/2} ||x - x'||_2); at most 1 up to integration error.
double flow_contraction_ratio(const PotentialSpec& V, const MatrixTuple& x, const MatrixTuple& xp,
                              const MatrixTuple& y, double t, const OdeConfig& cfg = {});

// f(x, y) with values in a tuple of matrices.
using Observable = std::function<MatrixTuple(const MatrixTuple& x, const MatrixTuple& y)>;

Observable observable(const OperatorTracePoly& f);
Observable observable(const std::vector<OperatorTracePoly>& f);
Observable x_block();
Observable y_block();

struct TtConfig {
  int paths = 2000;
  std::uint64_t seed = 1;
  OdeConfig ode;
};

struct TtResult {
  MatrixTuple mean;
  double se = 0;
  double bound = 0;  // a priori ||T_t f - T_{t,l} f||
  long steps = 0;
};

// (C m^{1/2} / (c (2 - 2^{1/2}))) 2^{-l/2} ||f||_Lip
double Tt_discretization_bound(const PotentialSpec& V, int level, double lipschitz);

// T_{t,l} f (x, y) = (P_h S_h)^{t/h} f (x, y), h = 2^{-l}, as an average over paths.
TtResult Tt_apply(const Observable& f, double lipschitz, const PotentialSpec& V, const MatrixTuple& x,
                  const MatrixTuple& y, double t, int level, const TtConfig& cfg = {});

struct RefinementReport {
  std::vector<int> levels;     // l
  std::vector<double> deltas;  // ||T_{t,l} f - T_{t,l+1} f||_2 at the test point
  std::vector<double> se;
  std::vector<double> bounds;
  double slope = 0;  // least-squares fit of log2(delta) against l
};

// All levels share one Brownian path per sample, built from the finest increments.
RefinementReport Tt_refinement(const Observable& f, double lipschitz, const PotentialSpec& V, const MatrixTuple& x,
                               const MatrixTuple& y, double t, int first_level, int last_level,
                               const TtConfig& cfg = {});

enum class CondMode { Direct, Semigroup };

struct CondExpConfig {
  SamplerConfig sampler;
  TtConfig tt;
  int level = 4;
  double tol = 1e-2;  // target for the convergence envelope in semigroup mode
  double lipschitz = 1;
  double max_time = 256;
};

struct CondExpResult {
  MatrixTuple estimate;
  double se = 0;
  CondMode mode = CondMode::Direct;
  double envelope = 0;             // time-truncation certificate, semigroup mode
  double discretization_bound = 0;  // a priori level bound, semigroup mode
  double t = 0;
  int level = 0;
};

// e^{-ct/2} (4 (C/c^2)(6 + 5 2^{1/2}) t^{-1/2} + (2/c) ||D_x V(x, y)||_2) ||f||_Lip
double semigroup_envelope(double c, double C, double t, double grad_norm, double lipschitz);

// E[f(X, y) | Y = y] under exp(-N^2 V(., y)).
CondExpResult cond_exp(const Observable& f, const PotentialSpec& V, const MatrixTuple& y, CondMode mode,
                       const CondExpConfig& cfg = {});

struct ModeAgreement {
  CondExpResult direct;
  CondExpResult semigroup;
  double distance = 0;
  double allowance = 0;  // 4 combined SE plus the envelope
  bool agree = false;
};

ModeAgreement cond_exp_both(const Observable& f, const PotentialSpec& V, const MatrixTuple& y,
                            const CondExpConfig& cfg = {});

struct LipschitzAudit {
  double max_ratio = 0;
  double bound = 0;  // (1 + C/c) ||f||_Lip
  double slack = 0;  // 4 SE of the worst ratio
  int pairs = 0;
  bool pass = false;
};

// Ratios ||g(y) - g(y')||_2 / ||y - y'||_2 for g(y) = E[f(X, y) | y], computed in
// semigroup mode with common noise for both points of a pair.
LipschitzAudit condexp_lipschitz_audit(const Observable& f, const PotentialSpec& V, int n, int pairs,
                                       std::uint64_t seed, const CondExpConfig& cfg = {});

}  // namespace mmlab
