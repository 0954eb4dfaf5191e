#pragma once

#include <Eigen/Dense>

#include <vector>

namespace mmlab {

// E tau(X^{2k}) for the GUE with E tau(X^2) = 1, k = 0..kmax.
// n <= 0 gives the semicircle (Catalan) values.
std::vector<double> gue_even_moments(int n, int kmax);
double catalan(int k);
// E tau(X_{w_1} ... X_{w_k}) for independent GUE matrices by summing over Wick pairings.
double gue_word_moment(const std::vector<int>& word, int n);

// Equilibrium measure of (1/2) x^2 + g x^4: support [-2a, 2a] with 12 g a^4 + a^2 = 1.
double quartic_half_edge(double g);
// Large-N even moments m_0, m_2, ..., m_{2 kmax} from the loop equations
// m_{k+1} + 4 g m_{k+3} = sum_{i+j=k-1} m_i m_j seeded by the equilibrium m_2.
std::vector<double> quartic_moments(double g, int kmax);

// Exact finite-N law of exp(-N^2 tau(v(x))) on one N x N Hermitian matrix for an
// even polynomial v = sum_k coeffs[k] x^k, via orthogonal polynomials on a
// Gauss-Legendre grid.
struct OneMatrixLaw {
  int n = 0;
  std::vector<double> moments;  // E tau(X^k), k = 0..kmax
  double energy = 0;            // E tau(v(X)) - v(0)
  double entropy = 0;           // normalized entropy h^(N)
};

OneMatrixLaw solve_one_matrix(const std::vector<double>& coeffs, int n, int kmax, int nodes = 1200);
std::vector<double> quartic_coefficients(double g);

// Normalized entropy of exp(-(N^2/2) sum_ab P_ab tau(x_a x_b)): (k/2) log(2 pi e) - (1/2) log det P.
double gaussian_entropy(const Eigen::MatrixXd& precision);

// Nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace mmlab
