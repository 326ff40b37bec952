// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch.hpp>

#include "lovelock/rational.hpp"

using lovelock::Rational;

TEST_CASE("rational arithmetic normalizes") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(1, -2) == Rational(-1, 2));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(1, 3) - Rational(1, 3) == Rational(0));
  CHECK(Rational(2, 3) * Rational(9, 4) == Rational(3, 2));
  CHECK(Rational(1, 2) / Rational(1, 8) == Rational(4));
  CHECK(Rational(-7, 3) < Rational(1, 9));
  CHECK(Rational(5, 7).str() == "5/7");
}

TEST_CASE("rational throws on zero division and overflow") {
  CHECK_THROWS_AS(Rational(1) / Rational(0), std::domain_error);
  const Rational huge(INT64_MAX / 2, 1);
  CHECK_THROWS_AS(huge * huge, std::overflow_error);
}
