#pragma once

#include <thread>
#include <vector>

#include "bear/matrix.hpp"

namespace bear {

// Runs fn(block_index, begin, end) over a fixed partition of [0, count) into
// `threads` near-equal blocks. The partition depends only on (count, threads),
// so reductions that combine per-block results in block order are
// deterministic for a fixed thread count. threads <= 1 runs inline.
template <typename Fn>
void parallel_blocks(index_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    if (count > 0) fn(0, index_t{0}, count);
    return;
  }
  const int nblocks = static_cast<int>(std::min<index_t>(threads, count));
  const index_t base = count / nblocks;
  const index_t rem = count % nblocks;
  std::vector<std::thread> pool;
  pool.reserve(nblocks);
  index_t begin = 0;
  for (int b = 0; b < nblocks; ++b) {
    const index_t len = base + (b < rem ? 1 : 0);
    const index_t end = begin + len;
    pool.emplace_back([&fn, b, begin, end] { fn(b, begin, end); });
    begin = end;
  }
  for (auto& t : pool) t.join();
}

}  // namespace bear
