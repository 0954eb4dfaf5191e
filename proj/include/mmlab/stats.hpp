#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace mmlab {

struct Estimate {
  double mean = 0;
  double se = 0;
  double ess = 0;
};

inline double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Plain i.i.d. estimate.
inline Estimate iid_estimate(const std::vector<double>& v) {
  Estimate e;
  e.mean = mean_of(v);
  e.se = v.size() > 1 ? std::sqrt(variance_of(v) / static_cast<double>(v.size())) : 0.0;
  e.ess = static_cast<double>(v.size());
  return e;
}

// Batch means over several chains: each chain of length n is cut into
// floor(sqrt(n)) contiguous batches and all batch means are pooled.
inline Estimate batch_means(const std::vector<std::vector<double>>& chains) {
  std::vector<double> batches;
  std::vector<double> all;
  for (const auto& c : chains) {
    all.insert(all.end(), c.begin(), c.end());
    const std::size_t n = c.size();
    if (n == 0) continue;
    std::size_t b = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(double(n)))));
    const std::size_t len = n / b;
    for (std::size_t k = 0; k < b; ++k) {
      double s = 0;
      for (std::size_t i = k * len; i < (k + 1) * len; ++i) s += c[i];
      batches.push_back(s / static_cast<double>(len));
    }
  }
  Estimate e;
  e.mean = mean_of(all);
  if (batches.size() < 2) {
    e.se = 0;
    e.ess = static_cast<double>(all.size());
    return e;
  }
  e.se = std::sqrt(variance_of(batches) / static_cast<double>(batches.size()));
  const double var = variance_of(all);
  e.ess = e.se > 0 ? std::min<double>(double(all.size()), var / (e.se * e.se)) : double(all.size());
  return e;
}

inline Estimate batch_means(const std::vector<double>& chain) {
  return batch_means(std::vector<std::vector<double>>{chain});
}

}  // namespace mmlab
