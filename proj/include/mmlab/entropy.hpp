#pragma once

#include "mmlab/sampler.hpp"
#include "mmlab/semigroup.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mmlab {

enum class FisherMode { Raw, Gaussian };

struct EntropyConfig {
  int n = 8;
  SamplerConfig outer;  // chain for the model law
  int points = 48;      // outer samples per grid point
  InnerConfig inner;
  int inner_min = 100;  // inner sample floor as the grid time grows
  double s_max = 8;     // grid in s = log(1 + t)
  int grid = 33;        // odd, for the Richardson estimate
  std::uint64_t seed = 1;
};

struct ScoreEstimate {
  double t = 0;
  double value = 0;
  double se = 0;
  FisherMode mode = FisherMode::Raw;
};

struct GridPoint {
  double s = 0;
  double t = 0;
  double value = 0;  // quadrature integrand in s
  double se = 0;
  ScoreEstimate fisher;
};

struct EntropyQuadrature {
  std::string kind;  // "h" or "h_g"
  int m = 0;
  std::vector<GridPoint> grid;
  double value = 0;
  double mc_se = 0;
  double quadrature_error = 0;
  double tail_low = 0;
  double tail_high = 0;
  double budget = 0;  // 4 mc_se + quadrature error + half the tail interval
  double second_moment = 0;  // E ||X||_2^2 on the active block
  double second_moment_se = 0;
};

// I^(N)(X + t^{1/2} S | Y) in raw mode, I_g^(N)(X~_t | Y) at renormalized time t in Gaussian mode.
ScoreEstimate fisher(const EvolvedPotential& ep, const SampleChain& chain, double t, FisherMode mode,
                     const EntropyConfig& cfg);

EntropyQuadrature entropy(const Model& model, const EntropyConfig& cfg);
EntropyQuadrature entropy_g(const Model& model, const EntropyConfig& cfg);

// h_g = h - (1/2) E||X||^2 - (m/2) log 2 pi.
double gaussian_relative(double h, double second_moment, int m);

struct SandwichRow {
  ScoreEstimate fisher;
  double lower = 0;  // m / (a + t)
  double upper = 0;  // min(m / t, I(0))
  bool ok = false;
};

struct SandwichReport {
  std::vector<SandwichRow> rows;
  bool monotone = true;
  bool pass = false;
};

SandwichReport fisher_sandwich_check(const Model& model, const std::vector<double>& times, const EntropyConfig& cfg);

struct ScalingReport {
  double scale = 1;
  double fisher = 0;
  double fisher_scaled = 0;
  double max_relative_defect = 0;  // per-sample |I(sX) s^2 / I(X) - 1|
  bool pass = false;
};

// Compares the score of the chain and of the chain multiplied by `scale` under V(x / scale).
ScalingReport fisher_scaling_check(const PotentialSpec& V, const SampleChain& chain, double scale);

struct LsiReport {
  EntropyQuadrature h_g;
  ScoreEstimate fisher_g;  // I_g at time 0
  double slack = 0;         // (1/2) I_g - |h_g|
  double allowance = 0;
  bool pass = false;
};

LsiReport lsi_check(const Model& model, const EntropyConfig& cfg);

struct AdditivityReport {
  EntropyQuadrature joint;
  EntropyQuadrature conditional;
  EntropyQuadrature marginal;
  double defect = 0;  // h(X,Y) - h(X|Y) - h(Y)
  double allowance = 0;
  bool pass = false;
};

AdditivityReport entropy_additivity_check(const PotentialSpec& V, const EntropyConfig& cfg);

void write_grid_csv(const EntropyQuadrature& q, std::ostream& os);
std::string to_json(const EntropyQuadrature& q);

}  // namespace mmlab
