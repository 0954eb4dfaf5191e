#pragma once

#include "mmlab/matrix_tuple.hpp"

#include <cstdint>
#include <random>

namespace mmlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for stream `k` of a master seed. Streams are independent mt19937_64 engines.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
  return splitmix64(splitmix64(master) ^ splitmix64(k + 0x632be59bd9b4e019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Hermitian matrix from the GUE with E tau(S^2) = variance: diagonal entries
// N(0, variance/N), off-diagonal real and imaginary parts N(0, variance/(2N)).
inline Matrix gue(Rng& rng, int n, double variance = 1.0) {
  Matrix s(n, n);
  const double d = std::sqrt(variance / n);
  const double o = std::sqrt(variance / (2.0 * n));
  for (int i = 0; i < n; ++i) {
    s(i, i) = Complex(d * rng.normal(), 0.0);
    for (int j = i + 1; j < n; ++j) {
      const double re = o * rng.normal();
      const double im = o * rng.normal();
      s(i, j) = Complex(re, im);
      s(j, i) = Complex(re, -im);
    }
  }
  return s;
}

inline MatrixTuple gue_tuple(Rng& rng, int count, int n, double variance = 1.0) {
  MatrixTuple t(count, n);
  for (int j = 0; j < count; ++j) t[j] = gue(rng, n, variance);
  return t;
}

}  // namespace mmlab
