// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lovelock {

// Binomial coefficients at desk scale (n <= 34 keeps everything in int64).
inline std::int64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline std::int64_t factorial(int n) {
  std::int64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// A strictly increasing multi-index I = (i_1 < i_2 < ... < i_p), entries in [0, n).
using MultiIndex = std::vector<int>;

// Rank of an increasing multi-index in the lexicographic enumeration of all
// p-subsets of {0,...,n-1}.
inline std::int64_t subset_rank(int n, const MultiIndex& idx) {
  const int p = static_cast<int>(idx.size());
  std::int64_t rank = 0;
  int prev = -1;
  for (int j = 0; j < p; ++j) {
    for (int v = prev + 1; v < idx[j]; ++v) rank += binomial(n - 1 - v, p - 1 - j);
    prev = idx[j];
  }
  return rank;
}

inline MultiIndex subset_unrank(int n, int p, std::int64_t rank) {
  MultiIndex idx(p);
  int v = 0;
  for (int j = 0; j < p; ++j) {
    while (true) {
      const std::int64_t block = binomial(n - 1 - v, p - 1 - j);
      if (rank < block) break;
      rank -= block;
      ++v;
    }
    idx[j] = v++;
  }
  return idx;
}

// All p-subsets of {0,...,n-1} in lexicographic order.
inline std::vector<MultiIndex> all_subsets(int n, int p) {
  std::vector<MultiIndex> out;
  if (p < 0 || p > n) return out;
  const std::int64_t count = binomial(n, p);
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t r = 0; r < count; ++r) out.push_back(subset_unrank(n, p, r));
  return out;
}

// Sorts an arbitrary index tuple into increasing order. Returns the sign of
// the sorting permutation, or 0 if any index repeats.
inline int canonicalize(MultiIndex& idx) {
  int sign = 1;
  const int p = static_cast<int>(idx.size());
  for (int i = 1; i < p; ++i) {
    int j = i;
    while (j > 0 && idx[j - 1] > idx[j]) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
      --j;
    }
  }
  for (int i = 1; i < p; ++i)
    if (idx[i - 1] == idx[i]) return 0;
  return sign;
}

// Inserts value v in front of an increasing multi-index and re-sorts.
// Returns the sign, or 0 if v already occurs; `out` receives the merged index.
inline int insert_front(const MultiIndex& idx, int v, MultiIndex& out) {
  int pos = 0;
  for (int u : idx) {
    if (u == v) return 0;
    if (u < v) ++pos;
  }
  out.resize(idx.size() + 1);
  for (int i = 0; i < pos; ++i) out[i] = idx[i];
  out[pos] = v;
  for (std::size_t i = pos; i < idx.size(); ++i) out[i + 1] = idx[i];
  return (pos % 2 == 0) ? 1 : -1;
}

// One way of splitting an increasing multi-index into a head of size p1 and
// the complementary tail, with the shuffle sign.
struct Split {
  MultiIndex head, tail;
  int sign;
};

// All splits of `idx` into (head of size p1, tail), each with the sign of the
// permutation that maps head++tail back to idx.
inline std::vector<Split> all_splits(const MultiIndex& idx, int p1) {
  const int p = static_cast<int>(idx.size());
  std::vector<Split> out;
  if (p1 < 0 || p1 > p) return out;
  std::vector<int> sel(p1);
  for (int i = 0; i < p1; ++i) sel[i] = i;
  while (true) {
    Split s;
    s.head.reserve(p1);
    s.tail.reserve(p - p1);
    int sign_exp = 0;
    int next = 0;
    for (int i = 0; i < p; ++i) {
      if (next < p1 && sel[next] == i) {
        s.head.push_back(idx[i]);
        sign_exp += i - next;  // positions jumped over when pulling to front
        ++next;
      } else {
        s.tail.push_back(idx[i]);
      }
    }
    s.sign = (sign_exp % 2 == 0) ? 1 : -1;
    out.push_back(std::move(s));
    // next combination of positions
    int j = p1 - 1;
    while (j >= 0 && sel[j] == p - p1 + j) --j;
    if (j < 0) break;
    ++sel[j];
    for (int i = j + 1; i < p1; ++i) sel[i] = sel[i - 1] + 1;
  }
  return out;
}

}  // namespace lovelock
