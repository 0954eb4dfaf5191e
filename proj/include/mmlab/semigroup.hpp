#pragma once

#include "mmlab/potential.hpp"
#include "mmlab/sampler.hpp"

#include <cstdint>
#include <functional>

namespace mmlab {

struct QtConfig {
  double tol = 1e-10;
  int max_iterations = 100000;
};

struct QtResult {
  double value = 0;        // Q_t u(x, y), with u(0) = 0
  MatrixTuple minimizer;   // z*, x-block
  MatrixTuple grad;        // D u(z*, y), all variables
  int iterations = 0;
  double residual = 0;     // ||z* - (x - t D_x u(z*, y))||_2
  double damping = 1;
};

// Relaxation used by the fixed-point iteration z <- x - t D_x u(z).
double qt_damping(double t, double c, double C);

// Q_t u(x, y) = inf_z [u(z, y) + ||z - x||_2^2 / 2t] for the x-block of u.
QtResult inf_convolve(const PotentialSpec& u, double t, const MatrixTuple& x, const MatrixTuple& y,
                      const QtConfig& cfg = {});

// P_t f(x) = E f(x + t^{1/2} S) estimated with antithetic GUE pairs.
Estimate gaussian_smooth(const std::function<double(const MatrixTuple&)>& f, const MatrixTuple& x, double t,
                         int pairs, std::uint64_t seed);

struct TrotterConfig {
  int outer_samples = 32;  // antithetic pairs at the last P step
  int inner_samples = 1;   // antithetic pairs at every earlier P step
  std::uint64_t seed = 1;
  QtConfig qt{1e-10, 5000};
};

struct TrotterResult {
  double value = 0;  // R_{t,l}u(x, y) - R_{t,l}u(0, y), common noise
  double value_se = 0;
  double offset = 0;  // R_{t,l}u(0, y)
  MatrixTuple grad;   // D_x R_{t,l} u(x, y)
  double grad_se = 0;
  double value_bound = 0;  // |R_t u - R_{t,l} u| a priori
  double grad_bound = 0;   // ||D_x R_t u - D_x R_{t,l} u|| a priori
  int steps = 0;
};

double trotter_value_bound(double C, int m, double t, int level, double grad_norm_squared);
double trotter_grad_bound(double C, int m, double t, int level);
// ||D_x R_t u - D_x R_s u||_2 for C (t - s) <= 1.
double time_continuity_bound(double C, int m, double dt, double grad_norm);

// R_{t,l} u = (P_h Q_h)^{t/h} u with h = 2^{-l}, t a multiple of h.
TrotterResult trotter_R(const PotentialSpec& u, double t, int level, const MatrixTuple& x, const MatrixTuple& y,
                        const TrotterConfig& cfg = {});

enum class TimeMode { Raw, Renormalized };

struct InnerConfig {
  int chains = 4;  // even: halves give independent estimates
  int samples = 400;
  int burn_in = 200;
  int thin = 1;
  double step = 0.8;
  int descent_steps = 30;
};

// V_t for the roles of a model: noise on the active block, the given block
// held fixed and the hidden block integrated out.
struct EvolvedPotential {
  Model model;
  TimeMode mode = TimeMode::Raw;
  InnerConfig inner;
};

EvolvedPotential evolved(const PotentialSpec& V, TimeMode mode = TimeMode::Raw, InnerConfig inner = {});

struct EvolvedGrad {
  MatrixTuple grad;  // D_x V_t or D_x V~_t on the active block
  double se = 0;
  MatrixTuple u_mean;  // mean of D_x V(X) - X under the conditional law
  MatrixTuple u_a;     // same from the first half of the chains
  MatrixTuple u_b;     // and from the second half
  double acceptance = 1;
};

// Raw: D_x V_t(x, y) = E[D_x V(X, Y) | X + t^{1/2} S = x, Y = y].
// Renormalized: D_x V~_t(x, y) = e^{t/2} D_x V_{e^t - 1}(e^{t/2} x, y).
EvolvedGrad evolved_grad(const EvolvedPotential& ep, double t, const MatrixTuple& x, const MatrixTuple& y,
                         std::uint64_t seed);

// Conditional mean of D_x V - x given the active block's noisy value xt at raw time t.
EvolvedGrad conditional_score_shift(const EvolvedPotential& ep, double t, const MatrixTuple& xt, const MatrixTuple& y,
                                    std::uint64_t seed);

// Active/given/hidden blocks of a full tuple and back.
MatrixTuple assemble(const Roles& roles, const MatrixTuple& active, const MatrixTuple& given, const MatrixTuple& hidden);

}  // namespace mmlab
