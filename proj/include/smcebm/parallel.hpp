// Copyright 2026 smc-ebm authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic data-parallel helper. Work is cut into fixed-size blocks that
// do not depend on the thread count; callers write only to per-index (or
// per-block) slots and perform reductions serially in index order afterwards,
// so results are bit-identical under any number of threads.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace smcebm {

// Fixed block size for all parallel loops and blocked reductions.
inline constexpr std::int64_t kParallelBlock = 4096;

inline std::int64_t block_count(std::int64_t n) {
  return (n + kParallelBlock - 1) / kParallelBlock;
}

// Thread count from SMCEBM_THREADS, else hardware concurrency. Re-read on each
// call so tests can flip the variable between runs.
inline int thread_count() {
  if (const char* env = std::getenv("SMCEBM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(begin, end) over [0, n) in blocks of kParallelBlock. The body is
// invoked once per block even on the serial path, so `begin` is always
// block-aligned (begin / kParallelBlock is the block id) and blocked partial
// reductions see the same grouping under every thread count. The body must
// only touch state owned by indices in its range or its block's slot.
template <typename Body>
void parallel_for(std::int64_t n, const Body& body) {
  if (n <= 0) return;
  const std::int64_t blocks = (n + kParallelBlock - 1) / kParallelBlock;
  const int threads = thread_count();
  if (threads <= 1 || blocks == 1) {
    for (std::int64_t b = 0; b < blocks; ++b)
      body(b * kParallelBlock, std::min(n, (b + 1) * kParallelBlock));
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      const std::int64_t lo = b * kParallelBlock;
      const std::int64_t hi = std::min(n, lo + kParallelBlock);
      body(lo, hi);
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<std::int64_t>(threads, blocks));
  pool.reserve(spawn - 1);
  for (int t = 1; t < spawn; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace smcebm
