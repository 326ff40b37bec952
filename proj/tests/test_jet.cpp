// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch.hpp>
#include <cmath>

#include "lovelock/jet.hpp"

using namespace lovelock;

TEST_CASE("jet reproduces derivatives of a polynomial exactly") {
  // f(x, y) = x^3 y + 2 x y^2 - 5
  auto xs = seed_point({1.5, -0.75}, 3);
  const Jet& x = xs[0];
  const Jet& y = xs[1];
  const Jet f = x * x * x * y + 2.0 * x * y * y - 5.0;

  const double xv = 1.5, yv = -0.75;
  CHECK(f.value() == Approx(xv * xv * xv * yv + 2 * xv * yv * yv - 5).epsilon(1e-14));
  CHECK(f.partial({1, 0}) == Approx(3 * xv * xv * yv + 2 * yv * yv).epsilon(1e-14));
  CHECK(f.partial({0, 1}) == Approx(xv * xv * xv + 4 * xv * yv).epsilon(1e-14));
  CHECK(f.partial({1, 1}) == Approx(3 * xv * xv + 4 * yv).epsilon(1e-14));
  CHECK(f.partial({2, 0}) == Approx(6 * xv * yv).epsilon(1e-14));
  CHECK(f.partial({3, 0}) == Approx(6 * yv).epsilon(1e-14));
}

TEST_CASE("jet transcendental chain rule") {
  auto xs = seed_point({0.4, 1.2}, 4);
  const Jet f = sin(xs[0] * xs[1]) / (1.0 + xs[0] * xs[0]);
  const double a = 0.4, b = 1.2;
  const double fv = std::sin(a * b) / (1 + a * a);
  CHECK(f.value() == Approx(fv).epsilon(1e-14));
  // d/dx: cos(xy) y / (1+x^2) - sin(xy) 2x / (1+x^2)^2
  const double dfdx = std::cos(a * b) * b / (1 + a * a) - std::sin(a * b) * 2 * a / ((1 + a * a) * (1 + a * a));
  CHECK(f.partial({1, 0}) == Approx(dfdx).epsilon(1e-13));
}

TEST_CASE("jet derivative extraction lowers the order consistently") {
  auto xs = seed_point({0.3, -0.2, 0.9}, 3);
  const Jet f = cos(xs[0]) * xs[1] * xs[2] * xs[2];
  const Jet fx = f.derivative(0);
  CHECK(fx.order() == 2);
  CHECK(fx.value() == Approx(f.partial({1, 0, 0})).epsilon(1e-14));
  CHECK(fx.partial({0, 1, 1}) == Approx(f.partial({1, 1, 1})).epsilon(1e-14));
}

TEST_CASE("jet sqrt and division agree with closed forms") {
  auto xs = seed_point({2.0}, 4);
  const Jet f = sqrt(xs[0]);
  CHECK(f.partial({1}) == Approx(0.5 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(f.partial({2}) == Approx(-0.25 * std::pow(2.0, -1.5)).epsilon(1e-14));

  const Jet g = 1.0 / (1.0 + xs[0]);
  CHECK(g.partial({2}) == Approx(2.0 / 27.0).epsilon(1e-13));  // 2/(1+x)^3 at x=2
}

TEST_CASE("mixed-order operands truncate to the lower order") {
  auto hi = seed_point({0.5}, 4);
  auto lo = seed_point({0.5}, 2);
  const Jet f = hi[0] * hi[0] + lo[0];
  CHECK(f.order() == 2);
  CHECK(f.value() == Approx(0.75).epsilon(1e-15));
  CHECK(f.partial({1}) == Approx(2.0).epsilon(1e-15));
}
