#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace modulikit {

/// Parallelism cap: MODULIKIT_THREADS if set, else hardware concurrency.
inline unsigned thread_budget() {
  if (const char* env = std::getenv("MODULIKIT_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Applies fn to every index in [0, n). Work is split into contiguous stripes,
/// so results written to index-addressed slots are deterministic regardless of
/// the schedule.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  unsigned budget = std::min<size_t>(thread_budget(), n);
  if (budget <= 1 || n < 32) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  size_t stripe = (n + budget - 1) / budget;
  for (unsigned t = 0; t < budget; ++t) {
    size_t lo = t * stripe, hi = std::min(n, lo + stripe);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace modulikit
