// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lovelock/double_form.hpp"
#include "lovelock/fields.hpp"
#include "lovelock/geometry.hpp"

namespace lovelock::curvature {

// Closed-form constants for constant-curvature backgrounds:
//   C_{n,k} = (2k)! (n-3)! / (2^k (n-2k)!),   lambda_k = (n-1)(n-2) C_{n,k} mu^k.
inline double dimension_constant(int n, int k) {
  if (n < 3 || k < 1 || 2 * k > n) throw std::invalid_argument("dimension_constant: need n >= 3, 1 <= k <= n/2");
  double v = static_cast<double>(factorial(2 * k)) * static_cast<double>(factorial(n - 3));
  v /= std::pow(2.0, k) * static_cast<double>(factorial(n - 2 * k));
  return v;
}

inline double space_form_lambda(int n, int k, double mu) {
  return (n - 1) * (n - 2) * dimension_constant(n, k) * std::pow(mu, k);
}

// ---------------------------------------------------------------------------
// Table <-> DoubleForm glue
// ---------------------------------------------------------------------------

// Builds a (2,2) form from a full chart table [mu][nu][sigma][tau].
inline forms::DoubleForm<double> form22_from_table(const std::vector<double>& t, int n) {
  forms::DoubleForm<double> out(n, 2, 2);
  const auto pairs = all_subsets(n, 2);
  for (std::size_t a = 0; a < pairs.size(); ++a)
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      const int mu = pairs[a][0], nu = pairs[a][1], sg = pairs[b][0], ta = pairs[b][1];
      out.at(static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)) =
          t[static_cast<std::size_t>(((mu * n + nu) * n + sg) * n + ta)];
    }
  return out;
}

inline forms::DoubleForm<double> form11_from_matrix(const std::vector<double>& m, int n) {
  forms::DoubleForm<double> out(n, 1, 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = m[static_cast<std::size_t>(i * n + j)];
  return out;
}

inline std::vector<double> matrix_from_form11(const forms::DoubleForm<double>& f) {
  const int n = f.n();
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(i * n + j)] = f.at(i, j);
  return m;
}

// ---------------------------------------------------------------------------
// Pointwise curvature stack
// ---------------------------------------------------------------------------

// Curvature data at one chart point, reduced to an orthonormal frame: the
// curvature (2,2) form, its first two contractions, and for a requested k the
// 2k-Ricci tensor, 2k-curvature, Einstein-Lovelock tensor and the pointwise
// proportionality factor lambda = (2k)! S^{(2k)} / n.
struct CurvaturePack {
  int n = 0;
  int k = 0;
  std::vector<double> x;
  forms::GramFrame frame;

  forms::DoubleForm<double> riemann;  // (2,2), orthonormal frame
  forms::DoubleForm<double> ricci;    // (1,1)
  double scalar = 0;

  forms::DoubleForm<double> lovelock_ricci;   // (1,1)
  double lovelock_scalar = 0;
  forms::DoubleForm<double> lovelock_tensor;  // (1,1)
  double lambda = 0;
  double trace_identity_residual = 0;  // tr R^{(2k)} - (2k)! S^{(2k)}
};

// Chart-component curvature values from order-2 analytic jets.
struct ChartCurvature {
  int n = 0;
  std::vector<double> g, ginv;
  forms::DoubleForm<double> riemann;  // (2,2) in chart components
};

inline ChartCurvature chart_curvature(const fields::MetricFamily& family, const std::vector<double>& x) {
  const int n = family.n();
  // Derived metrics (e.g. offsets along a field that spends derivative
  // orders internally) may deliver lower-order jets than seeded; re-seed
  // until the Gram jets reach order 2.
  int seed_order = 2;
  auto jets = seed_point(x, seed_order);
  auto g_probe = family.gram_jets_at(jets);
  if (g_probe.front().order() < 2) {
    seed_order += 2 - g_probe.front().order();
    jets = seed_point(x, seed_order);
  }
  const auto m = geometry::MetricJets::at(family, jets);
  const auto rdd = geometry::riemann_double_form(m.g, m.gamma, n);
  ChartCurvature out;
  out.n = n;
  out.g.resize(static_cast<std::size_t>(n) * n);
  out.ginv.resize(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < out.g.size(); ++i) {
    out.g[i] = m.g[i].value();
    out.ginv[i] = m.ginv[i].value();
  }
  std::vector<double> table(rdd.size());
  for (std::size_t i = 0; i < rdd.size(); ++i) table[i] = rdd[i].value();
  out.riemann = form22_from_table(table, n);
  return out;
}

// 2k-Ricci tensor in chart components (weighted contractions against g^{-1}).
inline forms::DoubleForm<double> chart_lovelock_ricci(const ChartCurvature& c, int k) {
  auto acc = forms::power(c.riemann, k);
  for (int i = 0; i < 2 * k - 1; ++i) acc = forms::contract_with_inverse(acc, c.ginv);
  return acc;
}

inline double chart_lovelock_scalar(const ChartCurvature& c, int k) {
  auto acc = forms::power(c.riemann, k);
  for (int i = 0; i < 2 * k; ++i) acc = forms::contract_with_inverse(acc, c.ginv);
  return acc.at(0, 0) / static_cast<double>(factorial(2 * k));
}

inline CurvaturePack curvature_at(const fields::MetricFamily& family, const std::vector<double>& x,
                                  int k) {
  const int n = family.n();
  if (k < 0) throw std::invalid_argument("curvature_at: k >= 0");
  const auto chart = chart_curvature(family, x);

  CurvaturePack pack;
  pack.n = n;
  pack.k = k;
  pack.x = x;
  pack.frame.n = n;
  pack.frame.gram = chart.g;
  pack.frame.frame = linalg::frame_from_gram(chart.g, n);

  pack.riemann = forms::transform(chart.riemann, pack.frame.frame);
  pack.ricci = forms::contract(pack.riemann);
  pack.scalar = forms::contract(pack.ricci).at(0, 0);

  if (k >= 1) {
    const auto rk = forms::power(pack.riemann, k);
    pack.lovelock_ricci = forms::contract_iterated(rk, 2 * k - 1);
    const double full = forms::contract_iterated(rk, 2 * k).at(0, 0);
    pack.lovelock_scalar = full / static_cast<double>(factorial(2 * k));
    pack.lambda = static_cast<double>(factorial(2 * k)) * pack.lovelock_scalar / n;

    const auto g = forms::metric_identity<double>(n);
    pack.lovelock_tensor = pack.lovelock_ricci * (1.0 / static_cast<double>(factorial(2 * k - 1))) -
                           g * pack.lovelock_scalar;

    double tr = 0;
    for (int i = 0; i < n; ++i) tr += pack.lovelock_ricci.at(i, i);
    pack.trace_identity_residual = tr - static_cast<double>(factorial(2 * k)) * pack.lovelock_scalar;
  } else {
    pack.lovelock_ricci = forms::DoubleForm<double>(n, 1, 1);
    pack.lovelock_tensor = forms::DoubleForm<double>(n, 1, 1);
  }
  return pack;
}

// Pointwise 2k-Einstein defect R^{(2k)} - lambda g in the orthonormal frame.
inline forms::DoubleForm<double> einstein_defect(const fields::MetricFamily& family,
                                                 const std::vector<double>& x, int k) {
  const auto pack = curvature_at(family, x, k);
  return pack.lovelock_ricci - forms::metric_identity<double>(pack.n) * pack.lambda;
}

// ---------------------------------------------------------------------------
// Field derivatives by finite-difference stencils over chart points
// ---------------------------------------------------------------------------

// A field of symmetric 2-tensors (chart components) and of scalars.
using MatrixFieldFn = std::function<std::vector<double>(const std::vector<double>&)>;
using ScalarFieldFn = std::function<double(const std::vector<double>&)>;

inline std::vector<double> gradient_fd(const ScalarFieldFn& f, const std::vector<double>& x,
                                       double step) {
  const int n = static_cast<int>(x.size());
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    auto p = x, m = x;
    p[static_cast<std::size_t>(a)] += step;
    m[static_cast<std::size_t>(a)] -= step;
    out[static_cast<std::size_t>(a)] = (f(p) - f(m)) / (2 * step);
  }
  return out;
}

// Divergence (delta t)_j = -g^{ab} (nabla_a t)_{bj} of a tensor field given by
// chart values; the partial derivatives are central differences with the
// requested step, the connection is evaluated analytically at x.
inline std::vector<double> divergence_fd(const fields::MetricFamily& family, const MatrixFieldFn& t,
                                         const std::vector<double>& x, double step) {
  const int n = family.n();
  const auto jets = seed_point(x, 1);
  const auto m = geometry::MetricJets::at(family, jets);
  const auto gidx = [n](int k, int i, int j) { return static_cast<std::size_t>((k * n + i) * n + j); };

  const auto t0 = t(x);
  std::vector<double> dt(static_cast<std::size_t>(n) * n * n);  // [a][i][j]
  for (int a = 0; a < n; ++a) {
    auto p = x, q = x;
    p[static_cast<std::size_t>(a)] += step;
    q[static_cast<std::size_t>(a)] -= step;
    const auto tp = t(p), tq = t(q);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dt[static_cast<std::size_t>((a * n + i) * n + j)] =
            (tp[static_cast<std::size_t>(i * n + j)] - tq[static_cast<std::size_t>(i * n + j)]) / (2 * step);
  }

  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    double acc = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double cov = dt[static_cast<std::size_t>((a * n + b) * n + j)];
        for (int mm = 0; mm < n; ++mm)
          cov -= m.gamma[gidx(mm, a, b)].value() * t0[static_cast<std::size_t>(mm * n + j)] +
                 m.gamma[gidx(mm, a, j)].value() * t0[static_cast<std::size_t>(b * n + mm)];
        acc -= m.ginv[static_cast<std::size_t>(a * n + b)].value() * cov;
      }
    out[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

// Metric trace of a tensor field as a scalar field (uses the metric at the
// sample point, so its gradient is the d tr_g t term of the Bianchi operator).
inline ScalarFieldFn trace_field(const fields::MetricFamily& family, const MatrixFieldFn& t) {
  auto fam = family;
  return [fam, t](const std::vector<double>& x) {
    const int n = fam.n();
    const auto g = fam.gram(x);
    const auto ginv = linalg::inverse(g, n);
    const auto tv = t(x);
    double tr = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        tr += ginv[static_cast<std::size_t>(a * n + b)] * tv[static_cast<std::size_t>(a * n + b)];
    return tr;
  };
}

// Bianchi operator beta^{(2k)} t = delta t + (1/2k) d tr_g t, chart components.
inline std::vector<double> bianchi_fd(const fields::MetricFamily& family, const MatrixFieldFn& t,
                                      const std::vector<double>& x, int k, double step) {
  auto out = divergence_fd(family, t, x, step);
  const auto dtr = gradient_fd(trace_field(family, t), x, step);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += dtr[i] / (2.0 * k);
  return out;
}

// Norm of a chart 1-form: sqrt(g^{ab} w_a w_b).
inline double one_form_norm(const fields::MetricFamily& family, const std::vector<double>& x,
                            const std::vector<double>& w) {
  const int n = family.n();
  const auto ginv = linalg::inverse(family.gram(x), n);
  double acc = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) acc += ginv[static_cast<std::size_t>(a * n + b)] * w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)];
  return std::sqrt(std::max(acc, 0.0));
}

// Residual of the contracted second Bianchi identity for the Lovelock tensor:
//   delta R^{(2k)} + (2k-1)! d S^{(2k)} = 0 .
// Both derivative layers use the same finite-difference step, so the residual
// decays at the stencil's quadratic rate.
inline std::vector<double> lovelock_divergence_residual(const fields::MetricFamily& family,
                                                        const std::vector<double>& x, int k,
                                                        double step) {
  auto fam = family;
  MatrixFieldFn ricci2k = [fam, k](const std::vector<double>& p) {
    const auto chart = chart_curvature(fam, p);
    return matrix_from_form11(chart_lovelock_ricci(chart, k));
  };
  ScalarFieldFn s2k = [fam, k](const std::vector<double>& p) {
    return chart_lovelock_scalar(chart_curvature(fam, p), k);
  };
  auto out = divergence_fd(family, ricci2k, x, step);
  const auto ds = gradient_fd(s2k, x, step);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] += static_cast<double>(factorial(2 * k - 1)) * ds[i];
  return out;
}

}  // namespace lovelock::curvature
