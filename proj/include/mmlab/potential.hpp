#pragma once

#include "mmlab/matrix_tuple.hpp"
#include "mmlab/tracepoly.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace mmlab {

// Immutable handle to a potential V on nvars() self-adjoint matrices.
// Values are reported as V(x) - V(0).
class Potential {
 public:
  struct Node;

  Potential() = default;

  // (1/2) sum_j ||x_j - a_j I||_2^2
  static Potential quadratic(std::vector<double> shift);
  // Must be self-adjoint.
  static Potential trace_poly(ScalarTracePoly V);
  // V(A^{-1} x), A acting on the variable index.
  static Potential linear_image(const Potential& base, const Eigen::MatrixXd& A);
  // V1(x) + V2(y) on the concatenated variables.
  static Potential join(const Potential& left, const Potential& right);

  int nvars() const;
  double value(const MatrixTuple& x) const;
  MatrixTuple grad(const MatrixTuple& x) const;
  // Gradient components for the listed variables only.
  MatrixTuple grad(const MatrixTuple& x, const std::vector<int>& vars) const;
  // Both at once; shares intermediate products where possible.
  double value_and_grad(const MatrixTuple& x, const std::vector<int>& vars, MatrixTuple& g) const;
  std::string describe() const;
  bool valid() const { return static_cast<bool>(node_); }

  const Node& node() const { return *node_; }

 private:
  explicit Potential(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Window {
  double c = 1.0;
  double C = 1.0;
};

struct PotentialSpec {
  Potential potential;
  Window window;
  int m = 1;  // x-block: variables 0..m-1
  int n = 0;  // y-block: variables m..m+n-1
  // When positive the declared window only holds on ||x_j||_inf <= opnorm_radius.
  double opnorm_radius = 0.0;
  std::string label;

  int nvars() const { return m + n; }
};

PotentialSpec make_spec(Potential V, Window w, int m, int n = 0, std::string label = {});
PotentialSpec quadratic_spec(std::vector<double> shift, int n = 0);
// (1/2) tau(x^2) + g tau(x^4) with window [1, 1 + 12 g R^2] on ||x||_inf <= R.
PotentialSpec quartic_spec(double g, double radius);
// (1/2) tau(x1^2) + (1/2) tau(x2^2) + lambda tau(x1 x2), window [1-|l|, 1+|l|].
PotentialSpec coupled_gaussian_spec(double lambda, int m = 1, int n = 1);

enum class Block { X, Y, All };

std::vector<int> block_indices(const PotentialSpec& V, Block b);
MatrixTuple grad(const PotentialSpec& V, const MatrixTuple& x, Block b = Block::All);

// Which variables a computation treats as active, conditioned on, or integrated out.
struct Roles {
  std::vector<int> active;
  std::vector<int> given;
  std::vector<int> hidden;
};

Roles default_roles(const PotentialSpec& V);

struct Model {
  PotentialSpec spec;
  Roles roles;
};

Model default_model(const PotentialSpec& V);

struct WindowCheckConfig {
  int n = 4;
  int trials = 200;
  double scale = 1.0;
  std::uint64_t seed = 1;
  double tol = 1e-9;
};

struct WindowReport {
  double min_ratio = 0;
  double max_ratio = 0;
  double max_lipschitz = 0;
  int trials = 0;
  bool pass = false;
};

// Secant ratios <DV(x)-DV(x'), x-x'>_2 / ||x-x'||_2^2 on random pairs, which
// respect the operator-norm restriction when one is declared.
WindowReport hessian_window_check(const PotentialSpec& V, const WindowCheckConfig& cfg);

PotentialSpec join(const PotentialSpec& a, const PotentialSpec& b);
// Window (c/||A||^2, C ||A^{-1}||^2).
PotentialSpec linear_image(const PotentialSpec& a, const Eigen::MatrixXd& A);
// Joint law of (X+Y, Y-X) with the second block integrated out.
Model convolve(const PotentialSpec& a, const PotentialSpec& b);

}  // namespace mmlab
