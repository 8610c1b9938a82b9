#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace thinplate {

/// Runs body(i) for i in [0, n) on up to `threads` threads, each owning a
/// contiguous block. body must only write to storage indexed by i, so
/// results do not depend on the thread count.
template <class Body>
void parallel_for(int n, int threads, Body&& body) {
  const int t = std::clamp(threads, 1, std::max(n, 1));
  if (t == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(t);
  for (int b = 0; b < t; ++b) {
    const int lo = static_cast<int>(static_cast<long long>(n) * b / t);
    const int hi = static_cast<int>(static_cast<long long>(n) * (b + 1) / t);
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
}

inline int default_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

}  // namespace thinplate
