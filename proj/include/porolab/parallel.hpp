#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace porolab {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(block) for block = 0..n_blocks-1. The block decomposition is chosen
// by the caller and is independent of the thread count; callers store
// per-block results and merge them in block order, which makes every parallel
// reduction bitwise reproducible.
inline void run_blocks(size_t n_blocks, int threads,
                       const std::function<void(size_t)>& fn) {
  const int t = resolve_threads(threads);
  if (t <= 1 || n_blocks <= 1) {
    for (size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  const int workers = static_cast<int>(
      std::min<size_t>(static_cast<size_t>(t), n_blocks));
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t b = next.fetch_add(1);
        if (b >= n_blocks) break;
        fn(b);
      }
    });
  }
  for (auto& th : pool) th.join();
}

struct BlockRange {
  size_t begin, end;
};

inline std::vector<BlockRange> make_blocks(size_t n, size_t block_size) {
  std::vector<BlockRange> blocks;
  for (size_t b = 0; b < n; b += block_size)
    blocks.push_back({b, std::min(n, b + block_size)});
  if (blocks.empty()) blocks.push_back({0, 0});
  return blocks;
}

}  // namespace porolab
