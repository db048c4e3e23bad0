// Deterministic chunked parallelism.
//
// A range [lo, hi) is split into at most `threads` contiguous chunks and a
// worker runs per chunk.  Callers collect per-chunk results and merge them
// in chunk order, so the output never depends on scheduling.

#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace ratnear {

template <class Body>
void run_chunked(long long lo, long long hi, int threads, Body body) {
  const long long n = hi - lo;
  if (n <= 0) return;
  const int k = static_cast<int>(std::max<long long>(
      1, std::min<long long>(threads < 1 ? 1 : threads, n)));
  if (k == 1) {
    body(0, lo, hi);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (int c = 0; c < k; ++c) {
    long long a = lo + n * c / k, b = lo + n * (c + 1) / k;
    pool.emplace_back([=] { body(c, a, b); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ratnear
