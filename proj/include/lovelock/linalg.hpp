// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lovelock::linalg {

// Dense row-major n x n matrices as flat vectors; sizes stay <= 8.

template <class S>
std::vector<S> identity_matrix(int n, S one) {
  std::vector<S> m(static_cast<std::size_t>(n) * n, S{});
  for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i * n + i)] = one;
  return m;
}

inline std::vector<double> mat_mul(const std::vector<double>& a, const std::vector<double>& b, int n) {
  std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double aik = a[static_cast<std::size_t>(i * n + k)];
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j) c[static_cast<std::size_t>(i * n + j)] += aik * b[static_cast<std::size_t>(k * n + j)];
    }
  return c;
}

inline std::vector<double> transpose(const std::vector<double>& a, int n) {
  std::vector<double> t(a.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(j * n + i)] = a[static_cast<std::size_t>(i * n + j)];
  return t;
}

// Cholesky factor L (lower) of an SPD matrix; throws if a pivot fails.
inline std::vector<double> cholesky(const std::vector<double>& a, int n) {
  std::vector<double> L(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i * n + j)];
      for (int k = 0; k < j; ++k)
        s -= L[static_cast<std::size_t>(i * n + k)] * L[static_cast<std::size_t>(j * n + k)];
      if (i == j) {
        if (s <= 0.0) throw std::domain_error("cholesky: matrix not positive definite");
        L[static_cast<std::size_t>(i * n + j)] = std::sqrt(s);
      } else {
        L[static_cast<std::size_t>(i * n + j)] = s / L[static_cast<std::size_t>(j * n + j)];
      }
    }
  }
  return L;
}

// Frame F with F^T G F = I for SPD G: the inverse transpose of the Cholesky
// factor, solved column by column.
inline std::vector<double> frame_from_gram(const std::vector<double>& gram, int n) {
  const auto L = cholesky(gram, n);
  // F = L^{-T}: solve L^T F = I. L^T is upper triangular.
  std::vector<double> F(static_cast<std::size_t>(n) * n, 0.0);
  for (int col = 0; col < n; ++col) {
    for (int i = n - 1; i >= 0; --i) {
      double s = (i == col) ? 1.0 : 0.0;
      for (int k = i + 1; k < n; ++k)
        s -= L[static_cast<std::size_t>(k * n + i)] * F[static_cast<std::size_t>(k * n + col)];
      F[static_cast<std::size_t>(i * n + col)] = s / L[static_cast<std::size_t>(i * n + i)];
    }
  }
  return F;
}

// Gauss-Jordan inverse, generic over the scalar (double or jet-valued); the
// pivot magnitude is judged through `mag`, e.g. absolute value of the scalar
// part. Throws on singular input.
template <class S, class MagFn>
std::vector<S> inverse(std::vector<S> a, int n, S one, MagFn mag) {
  S zero = one;
  zero *= 0.0;
  std::vector<S> inv(static_cast<std::size_t>(n) * n, zero);
  for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i * n + i)] = one;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = mag(a[static_cast<std::size_t>(col * n + col)]);
    for (int r = col + 1; r < n; ++r) {
      const double m = mag(a[static_cast<std::size_t>(r * n + col)]);
      if (m > best) {
        best = m;
        piv = r;
      }
    }
    if (best == 0.0) throw std::domain_error("inverse: singular matrix");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a[static_cast<std::size_t>(piv * n + j)], a[static_cast<std::size_t>(col * n + j)]);
        std::swap(inv[static_cast<std::size_t>(piv * n + j)], inv[static_cast<std::size_t>(col * n + j)]);
      }
    const S d = a[static_cast<std::size_t>(col * n + col)];
    for (int j = 0; j < n; ++j) {
      a[static_cast<std::size_t>(col * n + j)] = a[static_cast<std::size_t>(col * n + j)] / d;
      inv[static_cast<std::size_t>(col * n + j)] = inv[static_cast<std::size_t>(col * n + j)] / d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const S f = a[static_cast<std::size_t>(r * n + col)];
      if (mag(f) == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a[static_cast<std::size_t>(r * n + j)] -= f * a[static_cast<std::size_t>(col * n + j)];
        inv[static_cast<std::size_t>(r * n + j)] -= f * inv[static_cast<std::size_t>(col * n + j)];
      }
    }
  }
  return inv;
}

inline std::vector<double> inverse(const std::vector<double>& a, int n) {
  return inverse<double>(a, n, 1.0, [](double v) { return std::fabs(v); });
}

// LU with partial pivoting.
template <class S, class MagFn>
S determinant(std::vector<S> a, int n, MagFn mag) {
  bool neg = false;
  S prod{};
  bool first = true;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = mag(a[static_cast<std::size_t>(col * n + col)]);
    for (int r = col + 1; r < n; ++r) {
      const double m = mag(a[static_cast<std::size_t>(r * n + col)]);
      if (m > best) {
        best = m;
        piv = r;
      }
    }
    if (best == 0.0) return S{};
    if (piv != col) {
      neg = !neg;
      for (int j = 0; j < n; ++j) std::swap(a[static_cast<std::size_t>(piv * n + j)], a[static_cast<std::size_t>(col * n + j)]);
    }
    const S d = a[static_cast<std::size_t>(col * n + col)];
    if (first) {
      prod = d;
      first = false;
    } else {
      prod *= d;
    }
    for (int r = col + 1; r < n; ++r) {
      const S f = a[static_cast<std::size_t>(r * n + col)] / d;
      if (mag(f) == 0.0) continue;
      for (int j = col; j < n; ++j) a[static_cast<std::size_t>(r * n + j)] -= f * a[static_cast<std::size_t>(col * n + j)];
    }
  }
  if (neg) prod = -prod;
  return prod;
}

inline double determinant(const std::vector<double>& a, int n) {
  if (n == 0) return 1.0;
  return determinant<double>(a, n, [](double v) { return std::fabs(v); });
}

// Cyclic Jacobi eigensolver for symmetric matrices. Returns eigenvalues and
// the orthogonal matrix whose columns are the eigenvectors.
struct EigenSym {
  std::vector<double> values;
  std::vector<double> vectors;  // column k is the eigenvector of values[k]
};

inline EigenSym jacobi_eigen(std::vector<double> a, int n) {
  std::vector<double> v = identity_matrix<double>(n, 1.0);
  auto idx = [n](int i, int j) { return static_cast<std::size_t>(i * n + j); };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a[idx(i, j)] * a[idx(i, j)];
    if (off < 1e-28) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[idx(p, q)];
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (a[idx(q, q)] - a[idx(p, p)]) / (2 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1.0 / std::sqrt(t * t + 1);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[idx(k, p)], akq = a[idx(k, q)];
          a[idx(k, p)] = c * akp - s * akq;
          a[idx(k, q)] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[idx(p, k)], aqk = a[idx(q, k)];
          a[idx(p, k)] = c * apk - s * aqk;
          a[idx(q, k)] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[idx(k, p)], vkq = v[idx(k, q)];
          v[idx(k, p)] = c * vkp - s * vkq;
          v[idx(k, q)] = s * vkp + c * vkq;
        }
      }
  }
  EigenSym out;
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = a[idx(i, i)];
  out.vectors = std::move(v);
  return out;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
struct GaussLegendre {
  std::vector<double> nodes, weights;
};

inline GaussLegendre gauss_legendre(int m) {
  GaussLegendre out;
  out.nodes.resize(m);
  out.weights.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    out.nodes[i] = -x;
    out.nodes[m - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    out.weights[i] = w;
    out.weights[m - 1 - i] = w;
  }
  return out;
}

// Least-squares slope of log(err) against log(step); used to confirm
// convergence orders of finite-difference residuals.
inline double loglog_slope(const std::vector<double>& steps, const std::vector<double>& errs) {
  const std::size_t m = steps.size();
  if (m < 2 || errs.size() != m) throw std::invalid_argument("loglog_slope: need >= 2 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(steps[i]);
    const double y = std::log(std::max(errs[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  return (m * sxy - sx * sy) / denom;
}

}  // namespace lovelock::linalg
