// Subset-mask bookkeeping for exterior-algebra coefficients.
//
// A grade-p coefficient in dimension k is indexed by a p-element subset of
// {0,...,k-1}, stored as a bitmask.  Within a grade the masks are ordered
// colexicographically, which coincides with plain numeric order of the
// masks and gives a stable dense rank via the combinatorial number system.

#pragma once

#include <cstdint>
#include <vector>

namespace ratnear {

inline constexpr int kMaxDim = 12;

// C(n, r) for 0 <= n, r <= kMaxDim.  C(12, 6) = 924 caps coefficient counts.
inline std::int64_t binomial(int n, int r) {
  static const auto table = [] {
    std::int64_t t[kMaxDim + 1][kMaxDim + 1] = {};
    for (int i = 0; i <= kMaxDim; ++i) {
      t[i][0] = 1;
      for (int j = 1; j <= i; ++j)
        t[i][j] = t[i - 1][j - 1] + (j <= i - 1 ? t[i - 1][j] : 0);
    }
    struct Holder { std::int64_t v[kMaxDim + 1][kMaxDim + 1]; };
    Holder h{};
    for (int i = 0; i <= kMaxDim; ++i)
      for (int j = 0; j <= kMaxDim; ++j) h.v[i][j] = t[i][j];
    return h;
  }();
  if (r < 0 || r > n) return 0;
  return table.v[n][r];
}

// All p-subsets of {0..k-1} as bitmasks, ascending (= colex order).
inline const std::vector<std::uint32_t>& subset_masks(int k, int p) {
  static std::vector<std::uint32_t> cache[kMaxDim + 1][kMaxDim + 1];
  auto& slot = cache[k][p];
  if (slot.empty() && binomial(k, p) > 0) {
    for (std::uint32_t m = 0; m < (1u << k); ++m)
      if (__builtin_popcount(m) == p) slot.push_back(m);
  }
  return slot;
}

// Dense rank of a p-subset mask within subset_masks(k, p).  For the subset
// {b_1 < ... < b_p} the rank is sum C(b_i, i) (combinatorial number system).
inline int subset_index(std::uint32_t mask) {
  int rank = 0, i = 1;
  while (mask) {
    int b = __builtin_ctz(mask);
    rank += static_cast<int>(binomial(b, i));
    ++i;
    mask &= mask - 1;
  }
  return rank;
}

// Sign of the permutation sorting the concatenation (I, J) of two disjoint
// index sets, each already ascending: parity of the number of pairs
// (i in I, j in J) with i > j.
inline int merge_sign(std::uint32_t mi, std::uint32_t mj) {
  int inversions = 0;
  std::uint32_t j = mj;
  while (j) {
    int b = __builtin_ctz(j);
    inversions += __builtin_popcount(mi >> (b + 1));
    j &= j - 1;
  }
  return (inversions & 1) ? -1 : 1;
}

}  // namespace ratnear
