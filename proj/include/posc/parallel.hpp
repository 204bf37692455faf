#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace posc {

/// Upper bound on worker threads used by kernels and audits (0 = hardware).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Chunks are disjoint,
/// so callers writing only to their own index range need no synchronization.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_chunk = 1024) {
  if (n == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(max_threads(), (n + min_chunk - 1) / min_chunk);
  if (workers <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace posc
