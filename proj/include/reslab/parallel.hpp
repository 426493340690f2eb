#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace reslab {

/// Runs fn(begin, end) over contiguous index chunks on `workers` threads.
/// Chunk boundaries depend only on (count, workers), and callers must write
/// results keyed by index, so output is identical for any worker count.
template <typename Fn>
void run_chunked(std::size_t count, int workers, Fn&& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || count < 2) {
    fn(std::size_t{0}, count);
    return;
  }
  const std::size_t n_chunks = std::min<std::size_t>(workers, count);
  const std::size_t step = (count + n_chunks - 1) / n_chunks;
  std::vector<std::thread> pool;
  pool.reserve(n_chunks);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::size_t b = c * step;
    const std::size_t e = std::min(count, b + step);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace reslab
