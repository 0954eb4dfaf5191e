#pragma once

#include "mmlab/finite_difference.hpp"
#include "mmlab/matrix_tuple.hpp"
#include "mmlab/random.hpp"
#include "mmlab/stats.hpp"
#include "mmlab/tracepoly.hpp"

#include <functional>
#include <vector>

namespace mmlab::testing {

inline MatrixTuple random_tuple(Rng& rng, int m, int n, double var = 1.0) { return gue_tuple(rng, m, n, var); }

using mmlab::fd_directional;
using mmlab::fd_laplacian;
using mmlab::hermitian_basis;

// Random self-adjoint scalar trace polynomial: each random word term is paired
// with its adjoint.
inline ScalarTracePoly random_potential(Rng& rng, int m, int max_degree, int terms) {
  ScalarTracePoly V(m);
  for (int t = 0; t < terms; ++t) {
    const int factors = 1 + static_cast<int>(rng.uniform() * 2);
    std::vector<TracedWord> fac, adj;
    int budget = max_degree;
    for (int f = 0; f < factors && budget > 0; ++f) {
      int len = 1 + static_cast<int>(rng.uniform() * budget);
      budget -= len;
      Word w;
      for (int k = 0; k < len; ++k) w.push_back(static_cast<int>(rng.uniform() * m));
      fac.emplace_back(w);
      adj.emplace_back(reversed(w));
    }
    Complex c(rng.normal(), rng.normal());
    V.add_term(fac, c);
    V.add_term(adj, std::conj(c));
  }
  return V;
}

inline Word random_word(Rng& rng, int m, int len) {
  Word w;
  for (int k = 0; k < len; ++k) w.push_back(static_cast<int>(rng.uniform() * m));
  return w;
}

}  // namespace mmlab::testing
