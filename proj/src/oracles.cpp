#include "mmlab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mmlab {

std::vector<double> gue_even_moments(int n, int kmax) {
  if (kmax < 0) throw std::invalid_argument("gue_even_moments: kmax must be nonnegative");
  const double inv_n2 = n > 0 ? 1.0 / (double(n) * double(n)) : 0.0;
  std::vector<double> m(kmax + 1);
  m[0] = 1;
  if (kmax >= 1) m[1] = 1;
  // Harer-Zagier: (k+2) m_{k+1} = (4k+2) m_k + k (4k^2-1) m_{k-1} / N^2, indices in units of 2.
  for (int k = 1; k < kmax; ++k)
    m[k + 1] = ((4.0 * k + 2) * m[k] + k * (4.0 * k * k - 1) * inv_n2 * m[k - 1]) / (k + 2.0);
  return m;
}

double catalan(int k) { return gue_even_moments(0, k)[k]; }

namespace {

// Sum of n^{cycles(gamma pi)} over color-respecting pairings pi, gamma the cyclic shift.
double pairing_sum(const std::vector<int>& word, std::vector<int>& partner, double n) {
  const int k = int(word.size());
  int first = 0;
  while (first < k && partner[first] >= 0) ++first;
  if (first == k) {
    std::vector<char> seen(k, 0);
    int cycles = 0;
    for (int i = 0; i < k; ++i) {
      if (seen[i]) continue;
      ++cycles;
      for (int j = i; !seen[j]; j = partner[(j + 1) % k]) seen[j] = 1;
    }
    return std::pow(n, cycles);
  }
  double total = 0;
  for (int j = first + 1; j < k; ++j) {
    if (partner[j] >= 0 || word[j] != word[first]) continue;
    partner[first] = j;
    partner[j] = first;
    total += pairing_sum(word, partner, n);
    partner[first] = partner[j] = -1;
  }
  return total;
}

}  // namespace

double gue_word_moment(const std::vector<int>& word, int n) {
  if (n < 1) throw std::invalid_argument("gue_word_moment: n must be positive");
  if (word.empty()) return 1.0;
  if (word.size() % 2) return 0.0;
  std::vector<int> partner(word.size(), -1);
  const double k = double(word.size());
  return pairing_sum(word, partner, n) * std::pow(double(n), -1.0 - k / 2);
}

double quartic_half_edge(double g) {
  if (g < 0) throw std::invalid_argument("quartic_half_edge: g must be nonnegative");
  if (g == 0) return 1.0;
  const double a2 = (-1.0 + std::sqrt(1.0 + 48.0 * g)) / (24.0 * g);
  return std::sqrt(a2);
}

std::vector<double> quartic_moments(double g, int kmax) {
  if (kmax < 0) throw std::invalid_argument("quartic_moments: kmax must be nonnegative");
  if (g == 0) return gue_even_moments(0, kmax);
  const double a2 = quartic_half_edge(g) * quartic_half_edge(g);
  // Full moment sequence with odd entries zero, mu[k] = E tau(X^k).
  std::vector<double> mu(2 * kmax + 1, 0.0);
  mu[0] = 1;
  if (kmax >= 1) mu[2] = a2 * (4 - a2) / 3;
  for (int k = 1; k + 3 <= 2 * kmax; k += 2) {
    double rhs = 0;
    for (int i = 0; i <= k - 1; ++i) rhs += mu[i] * mu[k - 1 - i];
    mu[k + 3] = (rhs - mu[k + 1]) / (4 * g);
  }
  std::vector<double> out(kmax + 1);
  for (int k = 0; k <= kmax; ++k) out[k] = mu[2 * k];
  return out;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2 / ((1 - x * x) * dp * dp);
  }
}

std::vector<double> quartic_coefficients(double g) { return {0.0, 0.0, 0.5, 0.0, g}; }

namespace {

double poly(const std::vector<double>& c, double x) {
  double s = 0;
  for (std::size_t k = c.size(); k-- > 0;) s = s * x + c[k];
  return s;
}

struct Recurrence {
  std::vector<double> lam;
  std::vector<double> w;  // normalized grid weights
  double log_mass = 0;    // log of the total weight before normalization
  double log_norms = 0;   // sum_{j<n} log h_j of the monic polynomials
  std::vector<double> density;  // sum_{j<n} q_j(lam)^2 w, sums to n
};

Recurrence stieltjes(const std::vector<double>& coeffs, int n, int nodes) {
  const double v0 = poly(coeffs, 0.0);
  auto exponent = [&](double x) { return n * (poly(coeffs, x) - v0); };
  double half = 1.0;
  while (exponent(half) - 2.0 * (n - 1) * std::log(1 + half) < 120 ||
         exponent(-half) - 2.0 * (n - 1) * std::log(1 + half) < 120)
    half *= 1.25;
  std::vector<double> x, wt;
  gauss_legendre(nodes, x, wt);
  Recurrence r;
  r.lam.resize(nodes);
  std::vector<double> logw(nodes);
  double top = -INFINITY;
  for (int i = 0; i < nodes; ++i) {
    r.lam[i] = half * x[i];
    logw[i] = std::log(half * wt[i]) - exponent(r.lam[i]);
    top = std::max(top, logw[i]);
  }
  r.w.resize(nodes);
  double mass = 0;
  for (int i = 0; i < nodes; ++i) mass += r.w[i] = std::exp(logw[i] - top);
  for (double& v : r.w) v /= mass;
  r.log_mass = top + std::log(mass);

  // Orthonormal recurrence; log h_j accumulates log beta_j.
  std::vector<double> prev(nodes, 0.0), cur(nodes, 1.0), next(nodes);
  r.density.assign(nodes, 0.0);
  double log_h = r.log_mass, b_prev = 0;
  for (int j = 0; j < n; ++j) {
    r.log_norms += log_h;
    double a = 0;
    for (int i = 0; i < nodes; ++i) {
      r.density[i] += cur[i] * cur[i] * r.w[i];
      a += r.w[i] * r.lam[i] * cur[i] * cur[i];
    }
    double b2 = 0;
    for (int i = 0; i < nodes; ++i) {
      next[i] = (r.lam[i] - a) * cur[i] - b_prev * prev[i];
      b2 += r.w[i] * next[i] * next[i];
    }
    const double b = std::sqrt(b2);
    for (int i = 0; i < nodes; ++i) next[i] /= b;
    std::swap(prev, cur);
    std::swap(cur, next);
    b_prev = b;
    log_h += 2 * std::log(b);
  }
  return r;
}

}  // namespace

OneMatrixLaw solve_one_matrix(const std::vector<double>& coeffs, int n, int kmax, int nodes) {
  if (n < 1) throw std::invalid_argument("solve_one_matrix: N must be positive");
  if (coeffs.size() < 3 || coeffs.size() % 2 == 0 || coeffs.back() <= 0)
    throw std::invalid_argument("solve_one_matrix: need an even-degree polynomial with positive leading coefficient");
  if (nodes < 4 * n) throw std::invalid_argument("solve_one_matrix: too few quadrature nodes for this N");
  const Recurrence r = stieltjes(coeffs, n, nodes);
  const Recurrence gauss = stieltjes({0.0, 0.0, 0.5}, n, nodes);
  OneMatrixLaw law;
  law.n = n;
  law.moments.assign(kmax + 1, 0.0);
  const double v0 = poly(coeffs, 0.0);
  for (std::size_t i = 0; i < r.lam.size(); ++i) {
    double p = r.density[i] / n;
    for (int k = 0; k <= kmax; ++k) {
      law.moments[k] += p;
      p *= r.lam[i];
    }
    law.energy += r.density[i] / n * (poly(coeffs, r.lam[i]) - v0);
  }
  // h = N^2 E V + log Z, compared against the GUE where E V = 1/2.
  const double n2 = double(n) * double(n);
  law.entropy = 0.5 * std::log(2 * std::numbers::pi * std::numbers::e) + (law.energy - 0.5) +
                (r.log_norms - gauss.log_norms) / n2;
  return law;
}

double gaussian_entropy(const Eigen::MatrixXd& precision) {
  if (precision.rows() != precision.cols() || precision.rows() == 0)
    throw std::invalid_argument("gaussian_entropy: precision must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("gaussian_entropy: precision must be positive definite");
  double logdet = 0;
  for (int i = 0; i < precision.rows(); ++i) logdet += 2 * std::log(llt.matrixL()(i, i));
  return 0.5 * precision.rows() * std::log(2 * std::numbers::pi * std::numbers::e) - 0.5 * logdet;
}

}  // namespace mmlab
