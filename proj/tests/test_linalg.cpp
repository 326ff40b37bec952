// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch.hpp>
#include <cmath>

#include "lovelock/linalg.hpp"
#include "lovelock/rng.hpp"

using namespace lovelock;
using namespace lovelock::linalg;

namespace {
std::vector<double> random_spd(Rng& rng, int n) {
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i * n + j)] = rng.uniform(-1, 1);
  auto at = mat_mul(transpose(a, n), a, n);
  for (int i = 0; i < n; ++i) at[static_cast<std::size_t>(i * n + i)] += n;  // well conditioned
  return at;
}
}  // namespace

TEST_CASE("frame_from_gram orthonormalizes") {
  Rng rng(11, "linalg.frame");
  for (int n = 2; n <= 8; ++n) {
    const auto g = random_spd(rng, n);
    const auto f = frame_from_gram(g, n);
    const auto ftg = mat_mul(mat_mul(transpose(f, n), g, n), f, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(ftg[static_cast<std::size_t>(i * n + j)] == Approx(i == j ? 1.0 : 0.0).margin(1e-12));
  }
}

TEST_CASE("inverse and determinant") {
  Rng rng(12, "linalg.inverse");
  const int n = 5;
  const auto a = random_spd(rng, n);
  const auto ai = inverse(a, n);
  const auto prod = mat_mul(a, ai, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(prod[static_cast<std::size_t>(i * n + j)] == Approx(i == j ? 1.0 : 0.0).margin(1e-12));
  CHECK(determinant(a, n) * determinant(ai, n) == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("jacobi eigen decomposition reconstructs the matrix") {
  Rng rng(13, "linalg.jacobi");
  const int n = 6;
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = rng.uniform(-2, 2);
      a[static_cast<std::size_t>(i * n + j)] = v;
      a[static_cast<std::size_t>(j * n + i)] = v;
    }
  const auto eig = jacobi_eigen(a, n);
  // Q D Q^T == A, Q^T Q == I
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double rec = 0, orth = 0;
      for (int k = 0; k < n; ++k) {
        rec += eig.vectors[static_cast<std::size_t>(i * n + k)] * eig.values[static_cast<std::size_t>(k)] *
               eig.vectors[static_cast<std::size_t>(j * n + k)];
        orth += eig.vectors[static_cast<std::size_t>(k * n + i)] * eig.vectors[static_cast<std::size_t>(k * n + j)];
      }
      CHECK(rec == Approx(a[static_cast<std::size_t>(i * n + j)]).margin(1e-11));
      CHECK(orth == Approx(i == j ? 1.0 : 0.0).margin(1e-12));
    }
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  const auto gl = gauss_legendre(8);
  double sum_x6 = 0, sum_1 = 0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    sum_1 += gl.weights[i];
    sum_x6 += gl.weights[i] * std::pow(gl.nodes[i], 6);
  }
  CHECK(sum_1 == Approx(2.0).epsilon(1e-14));
  CHECK(sum_x6 == Approx(2.0 / 7.0).epsilon(1e-13));
}

TEST_CASE("loglog slope recovers a quadratic rate") {
  std::vector<double> steps{1e-2, 5e-3, 2.5e-3};
  std::vector<double> errs;
  for (double s : steps) errs.push_back(3.7 * s * s);
  CHECK(loglog_slope(steps, errs) == Approx(2.0).epsilon(1e-12));
}
