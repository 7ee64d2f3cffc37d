#pragma once
#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace coulomb {

// Worker count: hardware concurrency capped by COULOMB_LAB_THREADS.
inline int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("COULOMB_LAB_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

// Block-parallel reduction with a deterministic combine order: partial
// sums are produced per block and combined in block order, so results do
// not depend on the number of workers.
inline double parallel_reduce(std::size_t n, const std::function<double(std::size_t, std::size_t)>& block_sum) {
  int workers = worker_count();
  std::size_t nblocks = std::max<std::size_t>(1, std::min<std::size_t>(workers * 4, n));
  std::size_t chunk = (n + nblocks - 1) / nblocks;
  std::vector<double> partial(nblocks, 0.0);
  if (workers == 1 || nblocks == 1) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      std::size_t lo = b * chunk, hi = std::min(n, lo + chunk);
      if (lo < hi) partial[b] = block_sum(lo, hi);
    }
  } else {
    std::vector<std::thread> pool;
    std::size_t per = (nblocks + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      std::size_t b0 = w * per, b1 = std::min(nblocks, b0 + per);
      if (b0 >= b1) break;
      pool.emplace_back([&, b0, b1]() {
        for (std::size_t b = b0; b < b1; ++b) {
          std::size_t lo = b * chunk, hi = std::min(n, lo + chunk);
          if (lo < hi) partial[b] = block_sum(lo, hi);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  // pairwise tree combine, fixed order
  std::vector<double> acc = partial;
  std::size_t m = acc.size();
  while (m > 1) {
    std::size_t half = (m + 1) / 2;
    for (std::size_t i = 0; i + half < m; ++i) acc[i] += acc[i + half];
    m = half;
  }
  return acc.empty() ? 0.0 : acc[0];
}

}  // namespace coulomb
