#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mmlab {

inline int& thread_count_ref() {
  static int n = 1;
  return n;
}

inline void set_thread_count(int n) { thread_count_ref() = std::max(1, n); }
inline int thread_count() { return thread_count_ref(); }

// Runs f(i) for i in [0, n). Results must be written to per-index slots so
// that reductions done afterwards in index order stay deterministic.
template <class F>
void parallel_for(int n, F&& f) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mmlab
