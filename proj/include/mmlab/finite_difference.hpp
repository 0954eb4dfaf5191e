#pragma once

#include "mmlab/matrix_tuple.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace mmlab {

// Hermitian basis orthonormal for Re Tr(a^* b).
template <typename Real>
std::vector<BasicMatrix<Real>> hermitian_basis(int n) {
  using C = std::complex<Real>;
  std::vector<BasicMatrix<Real>> out;
  const Real r = Real(1) / std::sqrt(Real(2));
  for (int k = 0; k < n; ++k) {
    BasicMatrix<Real> e = BasicMatrix<Real>::Zero(n, n);
    e(k, k) = 1;
    out.push_back(e);
  }
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) {
      BasicMatrix<Real> a = BasicMatrix<Real>::Zero(n, n), b = BasicMatrix<Real>::Zero(n, n);
      a(k, l) = a(l, k) = r;
      b(k, l) = C(0, r);
      b(l, k) = C(0, -r);
      out.push_back(a);
      out.push_back(b);
    }
  return out;
}


// (1/N) times the Tr-coordinate Laplacian of f over the variables in `vars`,
// by a 5-point stencil in long double.
inline long double fd_laplacian(const std::function<long double(const BasicMatrixTuple<long double>&)>& f,
                                const MatrixTuple& x0, const std::vector<int>& vars, long double h = 1e-2L) {
  BasicMatrixTuple<long double> x = x0.cast<long double>();
  const int n = x.dim();
  const auto basis = hermitian_basis<long double>(n);
  const long double f0 = f(x);
  long double total = 0;
  for (int j : vars)
    for (const auto& e : basis) {
      auto at = [&](long double s) {
        auto y = x;
        y[j] += std::complex<long double>(s) * e;
        return f(y);
      };
      total += (-at(2 * h) + 16 * at(h) - 30 * f0 + 16 * at(-h) - at(-2 * h)) / (12 * h * h);
    }
  return total / n;
}

// Directional derivative of f at x along h e_j by a central 5-point stencil.
inline long double fd_directional(const std::function<long double(const BasicMatrixTuple<long double>&)>& f,
                                  const MatrixTuple& x0, int j, const Matrix& dir, long double h = 1e-3L) {
  BasicMatrixTuple<long double> x = x0.cast<long double>();
  BasicMatrix<long double> d = dir.cast<std::complex<long double>>();
  auto at = [&](long double s) {
    auto y = x;
    y[j] += std::complex<long double>(s) * d;
    return f(y);
  };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

}  // namespace mmlab
