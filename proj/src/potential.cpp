#include "mmlab/potential.hpp"

#include "mmlab/random.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace mmlab {

namespace {

struct QuadraticNode {
  std::vector<double> shift;
};

struct TracePolyNode {
  ScalarTracePoly V;
  std::vector<OperatorTracePoly> grads;
  double v0 = 0;
};

struct LinearImageNode {
  Potential base;
  Eigen::MatrixXd A;
  Eigen::MatrixXd Ainv;
};

struct JoinNode {
  Potential left;
  Potential right;
};

}  // namespace

struct Potential::Node {
  std::variant<QuadraticNode, TracePolyNode, LinearImageNode, JoinNode> kind;
  int nvars = 0;
};

namespace {

void hermitian_part(Matrix& a) { a = (0.5 * (a + a.adjoint())).eval(); }

std::vector<int> all_vars(int n) {
  std::vector<int> v(n);
  for (int j = 0; j < n; ++j) v[j] = j;
  return v;
}

void check_input(const Potential& V, const MatrixTuple& x) {
  if (x.size() != V.nvars())
    throw std::invalid_argument("potential: expected " + std::to_string(V.nvars()) + " matrices, got " +
                                std::to_string(x.size()));
}

}  // namespace

Potential Potential::quadratic(std::vector<double> shift) {
  if (shift.empty()) throw std::invalid_argument("quadratic potential needs at least one variable");
  auto node = std::make_shared<Node>();
  node->nvars = static_cast<int>(shift.size());
  node->kind = QuadraticNode{std::move(shift)};
  return Potential(node);
}

Potential Potential::trace_poly(ScalarTracePoly V) {
  if (!is_self_adjoint(V)) throw std::invalid_argument("potential is not self-adjoint: " + to_string(V));
  TracePolyNode t;
  t.v0 = V.constant_term().real();
  for (int j = 0; j < V.nvars(); ++j) t.grads.push_back(cyclic_gradient(V, j));
  t.V = std::move(V);
  auto node = std::make_shared<Node>();
  node->nvars = t.V.nvars();
  node->kind = std::move(t);
  return Potential(node);
}

Potential Potential::linear_image(const Potential& base, const Eigen::MatrixXd& A) {
  if (A.rows() != base.nvars() || A.cols() != base.nvars())
    throw std::invalid_argument("linear_image: A must be " + std::to_string(base.nvars()) + "x" +
                                std::to_string(base.nvars()));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw std::invalid_argument("linear_image: A is singular");
  auto node = std::make_shared<Node>();
  node->nvars = base.nvars();
  node->kind = LinearImageNode{base, A, lu.inverse()};
  return Potential(node);
}

Potential Potential::join(const Potential& left, const Potential& right) {
  auto node = std::make_shared<Node>();
  node->nvars = left.nvars() + right.nvars();
  node->kind = JoinNode{left, right};
  return Potential(node);
}

int Potential::nvars() const { return node_ ? node_->nvars : 0; }

double Potential::value(const MatrixTuple& x) const {
  MatrixTuple g;
  return value_and_grad(x, {}, g);
}

MatrixTuple Potential::grad(const MatrixTuple& x) const { return grad(x, all_vars(nvars())); }

MatrixTuple Potential::grad(const MatrixTuple& x, const std::vector<int>& vars) const {
  check_input(*this, x);
  const int dim = x.dim();
  MatrixTuple g(static_cast<int>(vars.size()), dim);
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, QuadraticNode>) {
          for (std::size_t i = 0; i < vars.size(); ++i) {
            g[int(i)] = x[vars[i]];
            g[int(i)].diagonal().array() -= k.shift[vars[i]];
          }
        } else if constexpr (std::is_same_v<K, TracePolyNode>) {
          WordEvaluator<double> ev(x);
          for (std::size_t i = 0; i < vars.size(); ++i) {
            g[int(i)] = evaluate_operator(k.grads[vars[i]], ev);
            hermitian_part(g[int(i)]);
          }
        } else if constexpr (std::is_same_v<K, LinearImageNode>) {
          MatrixTuple full = mix(k.Ainv.transpose(), k.base.grad(mix(k.Ainv, x)));
          g = select(full, vars);
        } else {
          const int ml = k.left.nvars();
          std::vector<int> lv, rv, lpos, rpos;
          for (std::size_t i = 0; i < vars.size(); ++i) {
            if (vars[i] < ml) lv.push_back(vars[i]), lpos.push_back(int(i));
            else rv.push_back(vars[i] - ml), rpos.push_back(int(i));
          }
          if (!lv.empty()) scatter(g, lpos, k.left.grad(slice(x, 0, ml), lv));
          if (!rv.empty()) scatter(g, rpos, k.right.grad(slice(x, ml, x.size() - ml), rv));
        }
      },
      node_->kind);
  return g;
}

double Potential::value_and_grad(const MatrixTuple& x, const std::vector<int>& vars, MatrixTuple& g) const {
  check_input(*this, x);
  const int dim = x.dim();
  double v = 0;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, QuadraticNode>) {
          for (int j = 0; j < x.size(); ++j) {
            // (1/2)||x - a||^2 - (1/2)||a||^2 = (1/2)tau(x^2) - a tau(x)
            v += 0.5 * x[j].squaredNorm() / dim - k.shift[j] * tau(x[j]).real();
          }
          if (!vars.empty()) g = grad(x, vars);
        } else if constexpr (std::is_same_v<K, TracePolyNode>) {
          WordEvaluator<double> ev(x);
          v = evaluate_scalar(k.V, ev).real() - k.v0;
          g = MatrixTuple(static_cast<int>(vars.size()), dim);
          for (std::size_t i = 0; i < vars.size(); ++i) {
            g[int(i)] = evaluate_operator(k.grads[vars[i]], ev);
            hermitian_part(g[int(i)]);
          }
        } else if constexpr (std::is_same_v<K, LinearImageNode>) {
          MatrixTuple gb;
          v = k.base.value_and_grad(mix(k.Ainv, x), vars.empty() ? std::vector<int>{} : all_vars(x.size()), gb);
          if (!vars.empty()) g = select(mix(k.Ainv.transpose(), gb), vars);
        } else {
          const int ml = k.left.nvars();
          std::vector<int> lv, rv, lpos, rpos;
          for (std::size_t i = 0; i < vars.size(); ++i) {
            if (vars[i] < ml) lv.push_back(vars[i]), lpos.push_back(int(i));
            else rv.push_back(vars[i] - ml), rpos.push_back(int(i));
          }
          MatrixTuple gl, gr;
          v = k.left.value_and_grad(slice(x, 0, ml), lv, gl) +
              k.right.value_and_grad(slice(x, ml, x.size() - ml), rv, gr);
          g = MatrixTuple(static_cast<int>(vars.size()), dim);
          if (!lv.empty()) scatter(g, lpos, gl);
          if (!rv.empty()) scatter(g, rpos, gr);
        }
      },
      node_->kind);
  return v;
}

std::string Potential::describe() const {
  if (!node_) return "<empty>";
  std::ostringstream os;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, QuadraticNode>) {
          os << "quadratic(shift=";
          for (std::size_t j = 0; j < k.shift.size(); ++j) os << (j ? "," : "") << k.shift[j];
          os << ")";
        } else if constexpr (std::is_same_v<K, TracePolyNode>) {
          os << to_string(k.V);
        } else if constexpr (std::is_same_v<K, LinearImageNode>) {
          os << "linear_image(" << k.base.describe() << ")";
        } else {
          os << "join(" << k.left.describe() << "; " << k.right.describe() << ")";
        }
      },
      node_->kind);
  return os.str();
}

PotentialSpec make_spec(Potential V, Window w, int m, int n, std::string label) {
  if (!(w.c > 0) || !(w.C >= w.c)) throw std::invalid_argument("potential window must satisfy 0 < c <= C");
  if (m < 0 || n < 0 || m + n != V.nvars())
    throw std::invalid_argument("partition (" + std::to_string(m) + "," + std::to_string(n) +
                                ") does not match the potential's " + std::to_string(V.nvars()) + " variables");
  PotentialSpec s;
  s.potential = std::move(V);
  s.window = w;
  s.m = m;
  s.n = n;
  s.label = label.empty() ? s.potential.describe() : std::move(label);
  return s;
}

PotentialSpec quadratic_spec(std::vector<double> shift, int n) {
  const int total = static_cast<int>(shift.size());
  return make_spec(Potential::quadratic(std::move(shift)), {1.0, 1.0}, total - n, n);
}

PotentialSpec quartic_spec(double g, double radius) {
  if (g < 0) throw std::invalid_argument("quartic coupling must be nonnegative");
  auto V = 0.5 * ScalarTracePoly::trace(1, {0, 0}) + Complex(g) * ScalarTracePoly::trace(1, {0, 0, 0, 0});
  auto s = make_spec(Potential::trace_poly(V), {1.0, 1.0 + 12.0 * g * radius * radius}, 1, 0);
  s.opnorm_radius = radius;
  return s;
}

PotentialSpec coupled_gaussian_spec(double lambda, int m, int n) {
  if (m + n != 2) throw std::invalid_argument("coupled Gaussian has two variables");
  if (std::abs(lambda) >= 1) throw std::invalid_argument("coupled Gaussian needs |lambda| < 1");
  auto V = 0.5 * ScalarTracePoly::trace(2, {0, 0}) + 0.5 * ScalarTracePoly::trace(2, {1, 1}) +
           Complex(lambda) * ScalarTracePoly::trace(2, {0, 1});
  return make_spec(Potential::trace_poly(V), {1.0 - std::abs(lambda), 1.0 + std::abs(lambda)}, m, n);
}

std::vector<int> block_indices(const PotentialSpec& V, Block b) {
  std::vector<int> out;
  const int lo = b == Block::Y ? V.m : 0;
  const int hi = b == Block::X ? V.m : V.nvars();
  for (int j = lo; j < hi; ++j) out.push_back(j);
  return out;
}

MatrixTuple grad(const PotentialSpec& V, const MatrixTuple& x, Block b) {
  return V.potential.grad(x, block_indices(V, b));
}

Roles default_roles(const PotentialSpec& V) {
  Roles r;
  r.active = block_indices(V, Block::X);
  r.given = block_indices(V, Block::Y);
  return r;
}

Model default_model(const PotentialSpec& V) { return Model{V, default_roles(V)}; }

WindowReport hessian_window_check(const PotentialSpec& V, const WindowCheckConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("hessian_window_check: trials must be >= 1");
  Rng rng(cfg.seed);
  const int k = V.nvars();
  auto restrict_norm = [&](MatrixTuple& x) {
    if (V.opnorm_radius <= 0) return;
    const double r = opnorm(x);
    if (r > 0.98 * V.opnorm_radius) x *= 0.98 * V.opnorm_radius / r;
  };
  WindowReport rep;
  rep.min_ratio = 1e300;
  rep.max_ratio = -1e300;
  for (int t = 0; t < cfg.trials; ++t) {
    MatrixTuple x = gue_tuple(rng, k, cfg.n, cfg.scale * cfg.scale);
    const double eps = std::pow(10.0, -3.0 * rng.uniform());
    MatrixTuple xp = x;
    xp.axpy(eps, gue_tuple(rng, k, cfg.n, cfg.scale * cfg.scale));
    restrict_norm(x);
    restrict_norm(xp);
    MatrixTuple d = x - xp;
    const double dd = norm2_squared(d);
    if (dd == 0) continue;
    MatrixTuple gd = V.potential.grad(x) - V.potential.grad(xp);
    const double ratio = inner(gd, d) / dd;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    rep.max_lipschitz = std::max(rep.max_lipschitz, norm2(gd) / std::sqrt(dd));
    ++rep.trials;
  }
  rep.pass = rep.min_ratio >= V.window.c - cfg.tol && rep.max_ratio <= V.window.C + cfg.tol &&
             rep.max_lipschitz <= V.window.C + cfg.tol;
  return rep;
}

PotentialSpec join(const PotentialSpec& a, const PotentialSpec& b) {
  PotentialSpec s = make_spec(Potential::join(a.potential, b.potential),
                              {std::min(a.window.c, b.window.c), std::max(a.window.C, b.window.C)}, a.nvars(),
                              b.nvars(), "join(" + a.label + "; " + b.label + ")");
  if (a.opnorm_radius > 0 || b.opnorm_radius > 0) {
    const double ra = a.opnorm_radius > 0 ? a.opnorm_radius : 1e300;
    const double rb = b.opnorm_radius > 0 ? b.opnorm_radius : 1e300;
    s.opnorm_radius = std::min(ra, rb);
  }
  return s;
}

PotentialSpec linear_image(const PotentialSpec& a, const Eigen::MatrixXd& A) {
  Potential V = Potential::linear_image(a.potential, A);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  PotentialSpec s = make_spec(V, {a.window.c / (smax * smax), a.window.C / (smin * smin)}, a.m, a.n,
                              "linear_image(" + a.label + ")");
  return s;
}

Model convolve(const PotentialSpec& a, const PotentialSpec& b) {
  if (a.nvars() != b.nvars()) throw std::invalid_argument("convolve: variable counts differ");
  const int m = a.nvars();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (int j = 0; j < m; ++j) {
    A(j, j) = 1;
    A(j, m + j) = 1;
    A(m + j, j) = -1;
    A(m + j, m + j) = 1;
  }
  PotentialSpec joint = linear_image(join(a, b), A);
  joint.m = 2 * m;
  joint.n = 0;
  joint.label = "convolve(" + a.label + "; " + b.label + ")";
  Model model{joint, {}};
  for (int j = 0; j < m; ++j) {
    model.roles.active.push_back(j);
    model.roles.hidden.push_back(m + j);
  }
  return model;
}

}  // namespace mmlab
