#include <doctest.h>

#include "mmlab/oracles.hpp"

#include <cmath>
#include <numbers>

using namespace mmlab;

namespace {

// Harer-Zagier recursion for E tau(X^{2k}) of the GUE with E tau(X^2) = 1.
std::vector<double> harer_zagier(int n, int kmax) {
  std::vector<double> m(kmax + 1);
  m[0] = 1;
  if (kmax >= 1) m[1] = 1;
  for (int k = 1; k < kmax; ++k)
    m[k + 1] = ((4.0 * k + 2) / (k + 2)) * m[k] + (k * (4.0 * k * k - 1) / ((k + 2.0) * n * n)) * m[k - 1];
  return m;
}

}  // namespace

TEST_CASE("GUE even moments") {
  for (int n : {1, 2, 3, 8}) {
    const auto hz = harer_zagier(n, 5);
    const auto m = gue_even_moments(n, 5);
    for (int k = 0; k <= 5; ++k) CHECK(m[k] == doctest::Approx(hz[k]).epsilon(1e-12));
  }
  const auto m8 = gue_even_moments(8, 2);
  CHECK(m8[2] == doctest::Approx(2 + 1.0 / 64));
  const auto sc = gue_even_moments(0, 4);
  for (int k = 0; k <= 4; ++k) CHECK(sc[k] == doctest::Approx(catalan(k)));
  CHECK(catalan(5) == 42);
}

TEST_CASE("Wick pairing sums") {
  for (int n : {1, 2, 5}) {
    const auto hz = harer_zagier(n, 4);
    for (int k = 0; k <= 4; ++k) CHECK(gue_word_moment(std::vector<int>(2 * k, 0), n) == doctest::Approx(hz[k]));
  }
  CHECK(gue_word_moment({0, 1, 0, 1}, 8) == doctest::Approx(1.0 / 64));
  CHECK(gue_word_moment({0, 0, 1, 1}, 8) == doctest::Approx(1.0));
  CHECK(gue_word_moment({0, 1}, 4) == 0);
  CHECK(gue_word_moment({0, 0, 0}, 4) == 0);
}

TEST_CASE("quartic equilibrium moments satisfy the loop equations") {
  const double g = 0.1;
  const double a = quartic_half_edge(g);
  CHECK(12 * g * std::pow(a, 4) + a * a == doctest::Approx(1.0));
  const auto m = quartic_moments(g, 5);
  // m_{k+1} + 4 g m_{k+3} = sum_{i+j=k-1} m_i m_j in the (2j) indexing with k odd
  std::vector<double> mu(12, 0.0);
  for (int j = 0; j <= 5; ++j) mu[2 * j] = m[j];
  for (int k = 1; k + 3 <= 10; k += 2) {
    double rhs = 0;
    for (int i = 0; i <= k - 1; ++i) rhs += mu[i] * mu[k - 1 - i];
    CHECK(mu[k + 1] + 4 * g * mu[k + 3] == doctest::Approx(rhs).epsilon(1e-10));
  }
  const auto gue = quartic_moments(0.0, 3);
  for (int k = 0; k <= 3; ++k) CHECK(gue[k] == doctest::Approx(catalan(k)));
}

TEST_CASE("one-matrix law reproduces the GUE") {
  for (int n : {2, 4, 8}) {
    const auto law = solve_one_matrix({0, 0, 0.5}, n, 6);
    const auto hz = harer_zagier(n, 3);
    for (int k = 0; k <= 3; ++k) CHECK(law.moments[2 * k] == doctest::Approx(hz[k]).epsilon(1e-9));
    CHECK(law.moments[1] == doctest::Approx(0.0).scale(1));
    CHECK(law.entropy == doctest::Approx(0.5 * std::log(2 * std::numbers::pi * std::numbers::e)).epsilon(1e-8));
    CHECK(law.energy == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("one-matrix quartic law approaches the equilibrium measure") {
  const auto eq = quartic_moments(0.1, 1);
  const auto l8 = solve_one_matrix(quartic_coefficients(0.1), 8, 4);
  const auto l32 = solve_one_matrix(quartic_coefficients(0.1), 32, 4);
  CHECK(std::abs(l32.moments[2] - eq[1]) < std::abs(l8.moments[2] - eq[1]));
  CHECK(std::abs(l32.moments[2] - eq[1]) < 1e-3);
}

TEST_CASE("Gaussian entropy") {
  CHECK(gaussian_entropy(Eigen::MatrixXd::Identity(2, 2)) ==
        doctest::Approx(std::log(2 * std::numbers::pi * std::numbers::e)));
  CHECK(gaussian_entropy(Eigen::MatrixXd::Constant(1, 1, 4.0)) ==
        doctest::Approx(0.5 * std::log(2 * std::numbers::pi * std::numbers::e) - 0.5 * std::log(4.0)));
}

TEST_CASE("Gauss-Legendre rule") {
  std::vector<double> x, w;
  gauss_legendre(8, x, w);
  double s0 = 0, s14 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s0 += w[i];
    s14 += w[i] * std::pow(x[i], 14);
  }
  CHECK(s0 == doctest::Approx(2.0));
  CHECK(s14 == doctest::Approx(2.0 / 15));
}
