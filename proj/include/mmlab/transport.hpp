#pragma once

#include "mmlab/entropy.hpp"
#include "mmlab/sampler.hpp"
#include "mmlab/semigroup.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace mmlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct TransportConfig {
  InnerConfig inner{4, 400, 100, 1, 0.8, 30};  // inner chain at s = 0
  int inner_min = 100;       // inner sample floor as s grows
  double step_scale = 0.25;  // h L(s) <= step_scale for the vector field's Lipschitz constant L(s)
  double max_step = 2;
  double tolerance = 1e-2;  // target map budget; the truncation tail is kept below tail_fraction of it
  double tail_fraction = 0.1;
  double max_time = 80;
  bool step_doubling = false;  // Richardson estimate of the integration error
  std::uint64_t seed = 1;
};

// Mean and variance of the active and given blocks, as they enter the tail estimates.
struct LawSummary {
  MatrixTuple mean_x;
  MatrixTuple mean_y;
  double var_x = 0;  // E ||X - E X||_2^2
  double var_y = 0;
  int m = 0;
};

LawSummary summarize(const Model& model, const SampleChain& chain);

struct StepRecord {
  double s = 0;
  double h = 0;
  double se = 0;  // inner standard error of the vector field over the step
};

struct MapEvaluation {
  MatrixTuple value;
  double truncation = 0;  // T used for an infinite endpoint, 0 otherwise
  double tail = 0;
  double ode_error = 0;
  double inner_error = 0;  // inner standard error propagated through the flow
  double budget = 0;       // ode_error + 4 inner_error + tail
  int steps = 0;
  std::vector<StepRecord> log;
};

// ||F~_{s,inf}(x, y) - F~_{s,t}(x, y)||_2 for the map started at time t.
double reverse_tail_bound(double K, const LawSummary& law, const MatrixTuple& x, const MatrixTuple& y, double t);
// ||F~_{inf,s}(z, y) - z||_2, the error of stopping a map toward s = inf at time s.
double forward_tail_bound(double K, const LawSummary& law, const MatrixTuple& z, const MatrixTuple& y, double s);

// Solves d/ds F = (1/2)(D_x V~_s(F, y) - F) from F = x at s = t_start to s = s_target.
MapEvaluation integrate(const EvolvedPotential& ep, double s_target, double t_start, const MatrixTuple& x,
                        const MatrixTuple& y, const TransportConfig& cfg, std::uint64_t seed);
MatrixTuple integrate_map(const EvolvedPotential& ep, double s_target, double t_start, const MatrixTuple& x,
                          const MatrixTuple& y, const TransportConfig& cfg);

// F~_{s,t} with either endpoint possibly infinite. F = F~_{inf,0}, G = F~_{0,inf}.
struct TransportMap {
  EvolvedPotential ep;
  double s = kInfinity;
  double t = 0;
  LawSummary law;
  TransportConfig cfg;
  double K = 1;  // max(C, 1/c)

  MapEvaluation operator()(const MatrixTuple& x, const MatrixTuple& y, std::uint64_t seed) const;
};

TransportMap transport_map(const Model& model, double s, double t, const LawSummary& law,
                           const TransportConfig& cfg = {});

// Lipschitz bounds for F~_{s,t}.
struct LipschitzBounds {
  double lip = 0;        // max(C,1/c)^{7/2}
  double lip_dx = 0;     // max(C,1/c)^{1/2}
  double lip_dy = 0;     // (C/c - 1) max(C,1/C)^{3/2} |e^{-s/2} - e^{-t/2}|
  double deviation = 0;  // (max(C,1/c)^3 - 1) max(C,1/c)^{1/2} |e^{-s/2} - e^{-t/2}|
};

LipschitzBounds lipschitz_bounds(double c, double C, double s, double t);

struct PushforwardRow {
  Word word;
  Estimate pushed;
  Estimate reference;
  double map_allowance = 0;  // integration and truncation errors carried to the moment
  double allowance = 0;      // 4 combined SE plus map_allowance
  bool ok = false;
};

struct PushforwardReport {
  std::vector<PushforwardRow> rows;
  double ode_error = 0;  // largest step-doubling estimate on the subsample
  double max_budget = 0;
  double max_inner_error = 0;
  double max_opnorm = 0;
  int points = 0;
  bool pass = false;
};

// Moments of (F(x, y), y) over the inputs against reference moments. Words use the
// active variables first and then the given ones. Inner noise enters through the
// sample spread; the first doubling_points inputs are integrated with step doubling
// and their error estimate is applied to every input.
PushforwardReport pushforward_check(const TransportMap& map, const std::vector<MatrixTuple>& inputs,
                                    const std::vector<Word>& words,
                                    const std::function<Estimate(const Word&)>& reference, int doubling_points = 2);

// E tau(word) for independent GUE matrices at size n, no error.
std::function<Estimate(const Word&)> gue_reference(int n);

struct InverseRow {
  double error = 0;  // ||G(F(x, y), y) - x||_2
  double budget = 0;
};

struct InverseReport {
  std::vector<InverseRow> rows;
  double max_error = 0;
  double max_budget = 0;
  bool pass = false;
};

InverseReport inverse_map_check(const TransportMap& F, const TransportMap& G, const std::vector<MatrixTuple>& inputs);

struct LipschitzAuditReport {
  LipschitzBounds bounds;
  double lip = 0;
  double lip_dx = 0;
  double lip_dy = 0;
  double deviation = 0;
  double slack = 0;  // largest (budget + budget') / ||(x, y) - (x', y')||_2
  int pairs = 0;
  bool pass = false;
};

// Pairs (x, y), (x + d, y) and (x, y + d') with GUE perturbations, common inner noise per pair.
LipschitzAuditReport lipschitz_audit(const TransportMap& map, const std::vector<MatrixTuple>& inputs, int pairs,
                                     double perturbation, std::uint64_t seed);

struct GroupLawReport {
  double distance = 0;  // ||F~_{s,t}(F~_{t,u}(x)) - F~_{s,u}(x)||_2
  double allowance = 0;
  bool pass = false;
};

GroupLawReport group_law_check(const EvolvedPotential& ep, double s, double t, double u, const MatrixTuple& x,
                               const MatrixTuple& y, const TransportConfig& cfg);

struct TalagrandReport {
  Estimate cost;            // E ||F(X, Y) - X||_2^2
  double cost_allowance = 0;
  EntropyQuadrature h_g;
  double rhs = 0;  // 2 |h_g|
  double slack = 0;  // rhs - cost
  double allowance = 0;
  bool pass = false;
};

TalagrandReport talagrand_check(const Model& model, const SampleChain& chain, int points, const TransportConfig& tcfg,
                                const EntropyConfig& ecfg);

// Phi_j(x_1..x_j) is the map F of the law of x_j given x_1..x_{j-1}.
struct TriangularMap {
  PotentialSpec spec;
  std::vector<TransportMap> stages;

  struct Evaluation {
    MatrixTuple value;
    std::vector<double> budgets;
  };
  Evaluation operator()(const MatrixTuple& x, std::uint64_t seed) const;
};

class StageError : public std::runtime_error {
 public:
  StageError(int stage, const std::string& what);
  int stage() const { return stage_; }

 private:
  int stage_;
};

TriangularMap triangular_transport(const PotentialSpec& V, const SampleChain& chain, const TransportConfig& cfg = {});

struct TriangularAudit {
  bool dependency_exact = false;  // perturbing x_k leaves Phi_j unchanged for j < k
  double opnorm_bound = 0;        // (max(C,1/c)^3 - 1) max(C,1/c) Theta
  double max_opnorm = 0;          // largest ||Phi_j(x) - x_j||_inf over samples
  bool pass = false;
};

TriangularAudit triangular_audit(const TriangularMap& phi, const std::vector<MatrixTuple>& inputs, std::uint64_t seed);

// Each matrix as {"re": rows, "im": rows}.
std::string tuple_json(const MatrixTuple& a);
std::string to_json(const MapEvaluation& e, const MatrixTuple& input);

}  // namespace mmlab
