// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch.hpp>

#include "lovelock/combinatorics.hpp"

using namespace lovelock;

TEST_CASE("binomial and factorial basics") {
  CHECK(binomial(8, 3) == 56);
  CHECK(binomial(5, 0) == 1);
  CHECK(binomial(4, 5) == 0);
  CHECK(binomial(-1, 0) == 0);
  CHECK(factorial(0) == 1);
  CHECK(factorial(6) == 720);
}

TEST_CASE("subset rank and unrank invert each other") {
  for (int n = 1; n <= 8; ++n)
    for (int p = 0; p <= n; ++p) {
      const auto subsets = all_subsets(n, p);
      REQUIRE(static_cast<std::int64_t>(subsets.size()) == binomial(n, p));
      for (std::size_t r = 0; r < subsets.size(); ++r) {
        CHECK(subset_rank(n, subsets[r]) == static_cast<std::int64_t>(r));
        CHECK(subset_unrank(n, p, static_cast<std::int64_t>(r)) == subsets[r]);
      }
      // Lexicographic order.
      for (std::size_t r = 1; r < subsets.size(); ++r) CHECK(subsets[r - 1] < subsets[r]);
    }
}

TEST_CASE("canonicalize signs and rejects repeats") {
  MultiIndex a{2, 0, 1};
  CHECK(canonicalize(a) == 1);  // cyclic = even
  CHECK(a == MultiIndex{0, 1, 2});
  MultiIndex b{1, 0};
  CHECK(canonicalize(b) == -1);
  MultiIndex c{3, 3};
  CHECK(canonicalize(c) == 0);
}

TEST_CASE("insert_front computes the merge sign") {
  MultiIndex out;
  CHECK(insert_front({1, 3}, 0, out) == 1);
  CHECK(out == MultiIndex{0, 1, 3});
  CHECK(insert_front({1, 3}, 2, out) == -1);
  CHECK(out == MultiIndex{1, 2, 3});
  CHECK(insert_front({1, 3}, 4, out) == 1);
  CHECK(out == MultiIndex{1, 3, 4});
  CHECK(insert_front({1, 3}, 3, out) == 0);
}

TEST_CASE("splits enumerate all head choices with shuffle signs") {
  const MultiIndex idx{0, 1, 2};
  const auto splits = all_splits(idx, 1);
  REQUIRE(splits.size() == 3);
  CHECK(splits[0].head == MultiIndex{0});
  CHECK(splits[0].sign == 1);
  CHECK(splits[1].head == MultiIndex{1});
  CHECK(splits[1].sign == -1);
  CHECK(splits[2].head == MultiIndex{2});
  CHECK(splits[2].sign == 1);

  // Signs match a brute-force inversion count for a larger case.
  const MultiIndex big{0, 1, 2, 3, 4};
  for (const auto& s : all_splits(big, 2)) {
    std::vector<int> merged = s.head;
    merged.insert(merged.end(), s.tail.begin(), s.tail.end());
    int inversions = 0;
    for (std::size_t i = 0; i < merged.size(); ++i)
      for (std::size_t j = i + 1; j < merged.size(); ++j)
        if (merged[i] > merged[j]) ++inversions;
    CHECK(s.sign == ((inversions % 2 == 0) ? 1 : -1));
  }
}
