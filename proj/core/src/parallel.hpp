#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace eddm::detail {

// Run fn(begin, end) over [0, n) split into contiguous chunks, one per worker.
// Each index is processed exactly once and writes only its own outputs, so
// results are bitwise identical for any thread count. Small ranges run inline.
inline void parallel_for(int n, const std::function<void(int, int)>& fn, int grain = 2048) {
  if (n <= 0) return;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<long long>(hw, (n + grain - 1) / grain));
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end);
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace eddm::detail
