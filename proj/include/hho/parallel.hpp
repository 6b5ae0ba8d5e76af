// Chunked parallel loop over an index range. The worker count is capped by
// the HHO_THREADS environment variable. Results must be written to disjoint
// per-index slots; reductions are performed by the caller in a fixed order so
// that output is bitwise independent of the worker count.

#ifndef HHO_PARALLEL_HPP
#define HHO_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hho {

inline int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("HHO_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

template <typename Fn>
void parallel_for(int n, const Fn& fn) {
  const int workers = std::min(worker_count(), std::max(n, 1));
  if (workers <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int t = 0; t < workers; ++t) {
    const int begin = t * chunk, end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end]() {
      for (int i = begin; i < end; ++i) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

} // namespace hho

#endif
