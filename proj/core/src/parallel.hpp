#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace edgeflow::detail {

/// Splits [0, count) into contiguous chunks and runs fn(begin, end) on each.
/// Chunks are fixed by count and thread count alone, so any per-chunk
/// results can be reduced in chunk order.
template <typename Fn>
void parallel_chunks(int count, bool parallel, Fn&& fn) {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int workers = parallel ? std::min(count, std::max(2, hw)) : 1;
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  const int chunk = (count + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(0, std::min(count, chunk));
}

}  // namespace edgeflow::detail
