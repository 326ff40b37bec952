// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lovelock/curvature.hpp"
#include "lovelock/double_form.hpp"
#include "lovelock/fields.hpp"
#include "lovelock/geometry.hpp"
#include "lovelock/quadrature.hpp"

namespace lovelock::linearization {

using forms::DoubleForm;

// Contracts every slot of a flat rank-r table with the frame matrix
// (columns = orthonormal vectors in chart components), one mode at a time.
inline std::vector<double> to_orthonormal(std::vector<double> t, int n, int rank,
                                          const std::vector<double>& frame) {
  std::size_t stride_outer = 1;  // product of dims already processed (leading)
  for (int mode = 0; mode < rank; ++mode) {
    std::size_t block = 1;
    for (int m = mode + 1; m < rank; ++m) block *= static_cast<std::size_t>(n);
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t lead = 0; lead < stride_outer; ++lead)
      for (int newi = 0; newi < n; ++newi)
        for (int old = 0; old < n; ++old) {
          const double f = frame[static_cast<std::size_t>(old * n + newi)];
          if (f == 0.0) continue;
          const std::size_t src = (lead * n + static_cast<std::size_t>(old)) * block;
          const std::size_t dst = (lead * n + static_cast<std::size_t>(newi)) * block;
          for (std::size_t b = 0; b < block; ++b) out[dst + b] += f * t[src + b];
        }
    t = std::move(out);
    stride_outer *= static_cast<std::size_t>(n);
  }
  return t;
}

// Everything the pointwise operators need about (background, deformation,
// point), reduced to an orthonormal frame of the background metric:
// curvature stack, the deformation and its first two covariant derivatives,
// and the standard contractions built from them.
struct DeformationContext {
  int n = 0;
  std::vector<double> x;
  fields::MetricFamily family;
  bool space_form = false;
  double mu = 0;

  forms::GramFrame frame;
  DoubleForm<double> riemann;  // (2,2) orthonormal
  DoubleForm<double> ricci;    // (1,1)
  double scalar = 0;

  std::vector<double> h;       // n*n, orthonormal
  double tr_h = 0;
  std::vector<double> grad_h;  // [a][i][j]
  std::vector<double> hess_h;  // [a][b][i][j] = (nabla^2_{a,b} h)(i,j)

  std::vector<double> delta_h;             // (delta h)_a
  std::vector<double> grad_delta_h;        // [a][b] = nabla_a (delta h)_b
  std::vector<double> delta_star_delta_h;  // n*n
  std::vector<double> bochner_h;           // nabla* nabla h
  std::vector<double> hess_tr_h;           // Hessian of tr h
  double lap_tr_h = 0;                     // Delta tr h (geometer sign)
  double delta_delta_h = 0;                // delta(delta h)

  double hess(int a, int b, int i, int j) const {
    return hess_h[static_cast<std::size_t>(((a * n + b) * n + i) * n + j)];
  }

  DoubleForm<double> h_form() const { return curvature::form11_from_matrix(h, n); }

  static DeformationContext build(const fields::MetricFamily& family,
                                  const fields::SymTensorField& h_field,
                                  const std::vector<double>& x) {
    DeformationContext ctx;
    ctx.n = family.n();
    ctx.x = x;
    ctx.family = family;
    ctx.space_form = family.is_space_form();
    ctx.mu = family.mu();
    const int n = ctx.n;

    // Derived fields may spend derivative orders internally; probe and
    // re-seed until the deformation jets reach order 2.
    int seed_order = 2;
    auto seeds = seed_point(x, seed_order);
    auto h_jets = h_field.eval_jets(seeds);
    if (h_jets.front().order() < 2) {
      seed_order += 2 - h_jets.front().order();
      seeds = seed_point(x, seed_order);
      h_jets = h_field.eval_jets(seeds);
      if (h_jets.front().order() < 2)
        throw std::logic_error("DeformationContext: field consumes too many derivative orders");
    }
    const auto m = geometry::MetricJets::at(ctx.family, seeds);
    const auto grad_jets = geometry::covariant1_sym(h_jets, m.gamma, n);
    const auto hess_jets = geometry::covariant2_sym(grad_jets, m.gamma, n);
    const auto rdd_jets = geometry::riemann_double_form(m.g, m.gamma, n);

    std::vector<double> g_vals(static_cast<std::size_t>(n) * n);
    for (std::size_t i = 0; i < g_vals.size(); ++i) g_vals[i] = m.g[i].value();
    ctx.frame.n = n;
    ctx.frame.gram = g_vals;
    ctx.frame.frame = linalg::frame_from_gram(g_vals, n);
    const auto& F = ctx.frame.frame;

    auto values_of = [](const std::vector<Jet>& jets) {
      std::vector<double> v(jets.size());
      for (std::size_t i = 0; i < jets.size(); ++i) v[i] = jets[i].value();
      return v;
    };

    std::vector<double> rdd_table = to_orthonormal(values_of(rdd_jets), n, 4, F);
    ctx.riemann = curvature::form22_from_table(rdd_table, n);
    ctx.ricci = forms::contract(ctx.riemann);
    ctx.scalar = forms::contract(ctx.ricci).at(0, 0);

    ctx.h = to_orthonormal(values_of(h_jets), n, 2, F);
    ctx.grad_h = to_orthonormal(values_of(grad_jets), n, 3, F);
    ctx.hess_h = to_orthonormal(values_of(hess_jets), n, 4, F);

    ctx.tr_h = 0;
    for (int i = 0; i < n; ++i) ctx.tr_h += ctx.h[static_cast<std::size_t>(i * n + i)];

    ctx.delta_h.assign(static_cast<std::size_t>(n), 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        ctx.delta_h[static_cast<std::size_t>(a)] -= ctx.grad_h[static_cast<std::size_t>((b * n + b) * n + a)];

    ctx.grad_delta_h.assign(static_cast<std::size_t>(n) * n, 0.0);
    ctx.delta_star_delta_h.assign(static_cast<std::size_t>(n) * n, 0.0);
    ctx.bochner_h.assign(static_cast<std::size_t>(n) * n, 0.0);
    ctx.hess_tr_h.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double gd = 0, boch = 0, htr = 0;
        for (int c = 0; c < n; ++c) {
          gd -= ctx.hess(a, c, c, b);
          boch -= ctx.hess(c, c, a, b);
          htr += ctx.hess(a, b, c, c);
        }
        ctx.grad_delta_h[static_cast<std::size_t>(a * n + b)] = gd;
        ctx.bochner_h[static_cast<std::size_t>(a * n + b)] = boch;
        ctx.hess_tr_h[static_cast<std::size_t>(a * n + b)] = htr;
      }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        ctx.delta_star_delta_h[static_cast<std::size_t>(a * n + b)] =
            0.5 * (ctx.grad_delta_h[static_cast<std::size_t>(a * n + b)] +
                   ctx.grad_delta_h[static_cast<std::size_t>(b * n + a)]);

    ctx.lap_tr_h = 0;
    ctx.delta_delta_h = 0;
    for (int a = 0; a < n; ++a) {
      ctx.lap_tr_h -= ctx.hess_tr_h[static_cast<std::size_t>(a * n + a)];
      for (int b = 0; b < n; ++b) ctx.delta_delta_h += ctx.hess(a, b, a, b);
    }
    return ctx;
  }
};

// ---------------------------------------------------------------------------
// Algebraic operators on (1,1) and (p,p) forms in the orthonormal frame
// ---------------------------------------------------------------------------

// Composition (xi o eta)(v,w) = sum_i xi(v,e_i) eta(e_i,w): a matrix product.
inline std::vector<double> compose_sym(const std::vector<double>& xi, const std::vector<double>& eta,
                                       int n) {
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double v = xi[static_cast<std::size_t>(i * n + k)];
      if (v == 0.0) continue;
      for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i * n + j)] += v * eta[static_cast<std::size_t>(k * n + j)];
    }
  return out;
}

// Curvature action (K h)(v,w) = sum_i h(R(v,e_i)w, e_i), with the curvature
// (3,1)-tensor read off the (2,2) form.
inline std::vector<double> curvature_action(const DoubleForm<double>& riemann,
                                            const std::vector<double>& h, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double acc = 0;
      for (int i = 0; i < n; ++i) {
        if (i == a) continue;
        for (int d = 0; d < n; ++d) {
          if (d == b) continue;
          acc += riemann.get({a, i}, {b, d}) * h[static_cast<std::size_t>(d * n + i)];
        }
      }
      out[static_cast<std::size_t>(a * n + b)] = acc;
    }
  return out;
}

// The multiplication operator F_h on (p,p) forms. Its defining formula scales
// a component by the sum of the h-diagonal entries over the component's
// indices, which is frame-dependent for non-diagonal h; it is evaluated in an
// orthonormal eigenframe of h and transformed back, making it well defined
// (and independent of basis choices inside repeated eigenspaces).
inline DoubleForm<double> f_mul(const std::vector<double>& h, const DoubleForm<double>& w) {
  const int n = w.n();
  const auto eig = linalg::jacobi_eigen(h, n);
  auto w_eig = forms::transform(w, eig.vectors);
  const auto Is = all_subsets(n, w.p());
  const auto Js = all_subsets(n, w.q());
  for (std::size_t a = 0; a < Is.size(); ++a)
    for (std::size_t b = 0; b < Js.size(); ++b) {
      double factor = 0;
      for (int i : Is[a]) factor += eig.values[static_cast<std::size_t>(i)];
      for (int j : Js[b]) factor += eig.values[static_cast<std::size_t>(j)];
      w_eig.at(static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)) *= factor;
    }
  return forms::transform(w_eig, linalg::transpose(eig.vectors, n));
}

// Linearized contraction: (cdot_g h) w = - h^{ab}-weighted contraction, the
// derivative of the metric trace when the metric moves in direction h.
inline DoubleForm<double> cdot_apply(const std::vector<double>& h, const DoubleForm<double>& w) {
  std::vector<double> minus_h(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) minus_h[i] = -h[i];
  return forms::contract_with_inverse(w, minus_h);
}

// ---------------------------------------------------------------------------
// Differential operators at a point
// ---------------------------------------------------------------------------

// The second-order operator mapping deformations to (2,2) forms: the
// eight-term combination of second covariant derivatives.
inline DoubleForm<double> d2_operator(const DeformationContext& ctx) {
  const int n = ctx.n;
  DoubleForm<double> out(n, 2, 2);
  const auto pairs = all_subsets(n, 2);
  for (std::size_t a = 0; a < pairs.size(); ++a)
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      const int x1 = pairs[a][0], x2 = pairs[a][1];
      const int y1 = pairs[b][0], y2 = pairs[b][1];
      const double v = ctx.hess(y1, x1, x2, y2) + ctx.hess(x1, y1, x2, y2) + ctx.hess(y2, x2, x1, y1) +
                       ctx.hess(x2, y2, x1, y1) - ctx.hess(y1, x2, x1, y2) - ctx.hess(x2, y1, x1, y2) -
                       ctx.hess(y2, x1, x2, y1) - ctx.hess(x1, y2, x2, y1);
      out.at(static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)) = v;
    }
  return out;
}

// Linearized curvature form: -1/4 D2 h + 1/4 F_h(R).
inline DoubleForm<double> linearized_riemann(const DeformationContext& ctx) {
  return d2_operator(ctx) * (-0.25) + f_mul(ctx.h, ctx.riemann) * 0.25;
}

// First contraction of the linearized curvature, closed form:
//   1/2 (nabla*nabla h - Hess tr h - 2 delta* delta h + Ric o h + h o Ric).
inline std::vector<double> contracted_linearized_riemann(const DeformationContext& ctx) {
  const int n = ctx.n;
  const auto ric = curvature::matrix_from_form11(ctx.ricci);
  const auto rh = compose_sym(ric, ctx.h, n);
  const auto hr = compose_sym(ctx.h, ric, n);
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = 0.5 * (ctx.bochner_h[i] - ctx.hess_tr_h[i] - 2 * ctx.delta_star_delta_h[i] + rh[i] + hr[i]);
  return out;
}

// Second contraction, closed form: Delta tr h + delta delta h + <Ric, h>.
inline double twice_contracted_linearized_riemann(const DeformationContext& ctx) {
  double rdot_h = 0;
  for (int i = 0; i < ctx.n; ++i)
    for (int j = 0; j < ctx.n; ++j) rdot_h += ctx.ricci.at(i, j) * ctx.h[static_cast<std::size_t>(i * ctx.n + j)];
  return ctx.lap_tr_h + ctx.delta_delta_h + rdot_h;
}

// ---------------------------------------------------------------------------
// Linearized Lovelock operators on constant-curvature backgrounds
// ---------------------------------------------------------------------------

inline void require_space_form(const DeformationContext& ctx, const char* who) {
  if (!ctx.space_form)
    throw std::domain_error(std::string(who) + ": closed form needs a constant-curvature background");
}

// Zero-order part: (2k-1)(n-2) C_{n,k} mu^k (h - tr h g).
inline std::vector<double> lovelock_linearization_zero_order(const DeformationContext& ctx, int k) {
  require_space_form(ctx, "lovelock_linearization_zero_order");
  const int n = ctx.n;
  const double c = (2 * k - 1) * (n - 2) * curvature::dimension_constant(n, k) * std::pow(ctx.mu, k);
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i * n + j)] =
          c * (ctx.h[static_cast<std::size_t>(i * n + j)] - (i == j ? ctx.tr_h : 0.0));
  return out;
}

// Derivative part: C_{n,k} mu^{k-1} ((k-1)(c^2 Rdot h) g + (n-2k) c Rdot h).
inline std::vector<double> lovelock_linearization_derivative_order(const DeformationContext& ctx, int k) {
  require_space_form(ctx, "lovelock_linearization_derivative_order");
  const int n = ctx.n;
  const double c = curvature::dimension_constant(n, k) * std::pow(ctx.mu, k - 1);
  const auto c_rdot = contracted_linearized_riemann(ctx);
  const double c2_rdot = twice_contracted_linearized_riemann(ctx);
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i * n + j)] =
          c * ((k - 1) * c2_rdot * (i == j ? 1.0 : 0.0) + (n - 2 * k) * c_rdot[static_cast<std::size_t>(i * n + j)]);
  return out;
}

// Linearized 2k-Ricci tensor on a constant-curvature background.
inline std::vector<double> linearized_lovelock_ricci(const DeformationContext& ctx, int k) {
  auto a = lovelock_linearization_zero_order(ctx, k);
  const auto b = lovelock_linearization_derivative_order(ctx, k);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

// The stability operator L = (linearized 2k-Ricci) - lambda_k, two routes:
// the zero/derivative split above minus lambda_k h, and the expanded closed
// form used for the restricted cases.
inline std::vector<double> stability_operator(const DeformationContext& ctx, int k) {
  auto out = linearized_lovelock_ricci(ctx, k);
  const double lambda = curvature::space_form_lambda(ctx.n, k, ctx.mu);
  for (int i = 0; i < ctx.n; ++i)
    for (int j = 0; j < ctx.n; ++j)
      out[static_cast<std::size_t>(i * ctx.n + j)] -= lambda * ctx.h[static_cast<std::size_t>(i * ctx.n + j)];
  return out;
}

inline std::vector<double> stability_operator_expanded(const DeformationContext& ctx, int k) {
  require_space_form(ctx, "stability_operator_expanded");
  const int n = ctx.n;
  const double C = curvature::dimension_constant(n, k);
  const double mu = ctx.mu;
  const double cmu = C * std::pow(mu, k - 1);
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0;
      if (i == j)
        v += (k - 1) * (ctx.lap_tr_h + ctx.delta_delta_h) - (k * (n - 3) + 1) * mu * ctx.tr_h;
      v += 0.5 * (n - 2 * k) *
           (ctx.bochner_h[static_cast<std::size_t>(i * n + j)] - ctx.hess_tr_h[static_cast<std::size_t>(i * n + j)] -
            2 * ctx.delta_star_delta_h[static_cast<std::size_t>(i * n + j)] +
            2 * mu * ctx.h[static_cast<std::size_t>(i * n + j)]);
      out[static_cast<std::size_t>(i * n + j)] = cmu * v;
    }
  return out;
}

struct RestrictionViolation {
  double trace_residual = 0;
  double divergence_residual = 0;
};

inline RestrictionViolation measure_restriction(const DeformationContext& ctx) {
  RestrictionViolation v;
  v.trace_residual = std::fabs(ctx.tr_h);
  double d = 0;
  for (double w : ctx.delta_h) d += w * w;
  v.divergence_residual = std::sqrt(d);
  return v;
}

// Restriction to trace-free deformations. Throws (reporting the measured
// residual) if the hypothesis fails beyond `hypothesis_tol`.
inline std::vector<double> stability_operator_tracefree(const DeformationContext& ctx, int k,
                                                        double hypothesis_tol = 1e-8) {
  require_space_form(ctx, "stability_operator_tracefree");
  const auto viol = measure_restriction(ctx);
  if (viol.trace_residual > hypothesis_tol)
    throw std::domain_error("stability_operator_tracefree: tr h residual " +
                            std::to_string(viol.trace_residual));
  const int n = ctx.n;
  const double cmu = curvature::dimension_constant(n, k) * std::pow(ctx.mu, k - 1);
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0.5 * (n - 2 * k) * ctx.bochner_h[static_cast<std::size_t>(i * n + j)] -
                 (n - 2 * k) * ctx.delta_star_delta_h[static_cast<std::size_t>(i * n + j)] +
                 (n - 2 * k) * ctx.mu * ctx.h[static_cast<std::size_t>(i * n + j)];
      if (i == j) v += (k - 1) * ctx.delta_delta_h;
      out[static_cast<std::size_t>(i * n + j)] = cmu * v;
    }
  return out;
}

// Restriction to transverse-traceless deformations:
//   (n-2k) C mu^{k-1} (1/2 nabla*nabla + mu) h.
inline std::vector<double> stability_operator_tt(const DeformationContext& ctx, int k,
                                                 double hypothesis_tol = 1e-8) {
  require_space_form(ctx, "stability_operator_tt");
  const auto viol = measure_restriction(ctx);
  if (viol.trace_residual > hypothesis_tol || viol.divergence_residual > hypothesis_tol)
    throw std::domain_error("stability_operator_tt: restriction residuals (tr, delta) = (" +
                            std::to_string(viol.trace_residual) + ", " +
                            std::to_string(viol.divergence_residual) + ")");
  const int n = ctx.n;
  const double c = (n - 2 * k) * curvature::dimension_constant(n, k) * std::pow(ctx.mu, k - 1);
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = c * (0.5 * ctx.bochner_h[i] + ctx.mu * ctx.h[i]);
  return out;
}

// Elliptic replacement on trace-free deformations, both displayed routes.
inline std::vector<double> elliptic_replacement(const DeformationContext& ctx, int k,
                                                double hypothesis_tol = 1e-8) {
  require_space_form(ctx, "elliptic_replacement");
  const auto viol = measure_restriction(ctx);
  if (viol.trace_residual > hypothesis_tol)
    throw std::domain_error("elliptic_replacement: tr h residual " + std::to_string(viol.trace_residual));
  const int n = ctx.n;
  const double cmu = curvature::dimension_constant(n, k) * std::pow(ctx.mu, k - 1);
  auto out = stability_operator(ctx, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = (n - 2 * k) * cmu * ctx.delta_star_delta_h[static_cast<std::size_t>(i * n + j)];
      if (i == j) v -= (k - 1) * cmu * ctx.delta_delta_h;
      out[static_cast<std::size_t>(i * n + j)] += v;
    }
  return out;
}

inline std::vector<double> elliptic_replacement_closed(const DeformationContext& ctx, int k,
                                                       double hypothesis_tol = 1e-8) {
  require_space_form(ctx, "elliptic_replacement_closed");
  const auto viol = measure_restriction(ctx);
  if (viol.trace_residual > hypothesis_tol)
    throw std::domain_error("elliptic_replacement_closed: tr h residual " +
                            std::to_string(viol.trace_residual));
  const int n = ctx.n;
  const double c = (n - 2 * k) * curvature::dimension_constant(n, k) * std::pow(ctx.mu, k - 1);
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * (0.5 * ctx.bochner_h[i] + ctx.mu * ctx.h[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference linearization oracle
// ---------------------------------------------------------------------------

inline fields::MetricFamily offset_family(const fields::MetricFamily& base,
                                          const fields::SymTensorField& h, double t) {
  auto fam = base;
  auto field = h;
  fields::JetEvaluator eval = [fam, field, t](const std::vector<Jet>& x) {
    auto g = fam.gram_jets_at(x);
    const auto hv = field.eval_jets(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += t * hv[i];
    return g;
  };
  return fields::MetricFamily(base.name() + "_offset", base.n(), base.chart(), eval);
}

enum class LinearizedMap { riemann, lovelock_ricci };

// Central difference (T_{g+eps h} - T_{g-eps h}) / (2 eps) of a curvature map,
// with every evaluation pushed to the orthonormal frame of the UNPERTURBED
// metric before differencing. Also evaluated at eps/2, giving a Richardson
// error estimate and an extrapolated value.
struct FdLinearization {
  DoubleForm<double> derivative;    // the eps/2 central difference
  DoubleForm<double> extrapolated;  // Richardson-combined estimate
  double richardson_error = 0;      // max-norm estimate of the eps/2 error
};

inline DoubleForm<double> fd_map_once(const fields::MetricFamily& base,
                                      const fields::SymTensorField& h, const std::vector<double>& x,
                                      int k, double t, LinearizedMap map,
                                      const std::vector<double>& base_frame) {
  const auto fam_t = offset_family(base, h, t);
  const auto chart = curvature::chart_curvature(fam_t, x);
  if (map == LinearizedMap::riemann) return forms::transform(chart.riemann, base_frame);
  return forms::transform(curvature::chart_lovelock_ricci(chart, k), base_frame);
}

inline FdLinearization fd_linearize(const fields::MetricFamily& base, const fields::SymTensorField& h,
                                    const std::vector<double>& x, int k, double eps,
                                    LinearizedMap map) {
  const int n = base.n();
  const auto frame = linalg::frame_from_gram(base.gram(x), n);
  auto central = [&](double e) {
    auto plus = fd_map_once(base, h, x, k, e, map, frame);
    const auto minus = fd_map_once(base, h, x, k, -e, map, frame);
    plus -= minus;
    plus *= 1.0 / (2 * e);
    return plus;
  };
  const auto coarse = central(eps);
  const auto fine = central(eps / 2);
  FdLinearization out{fine, fine, 0.0};
  auto diff = fine - coarse;
  out.richardson_error = diff.max_abs() / 3.0;
  diff *= 1.0 / 3.0;
  out.extrapolated = fine + diff;
  return out;
}

// General split of the linearized 2k-Ricci tensor, valid on any background:
//   (2k-1) (cdot_g h) c^{2k-2} R^k + k c^{2k-1} (R^{k-1} Rdot h),
// assembled from the exact linearized contraction and the linearized
// curvature form.
inline std::vector<double> linearized_lovelock_ricci_split(const DeformationContext& ctx, int k) {
  const auto rk = forms::power(ctx.riemann, k);
  const auto c2km2 = forms::contract_iterated(rk, 2 * k - 2);  // (2,2)
  auto term1 = cdot_apply(ctx.h, c2km2);
  term1 *= static_cast<double>(2 * k - 1);

  const auto rdot = linearized_riemann(ctx);
  auto term2 = forms::contract_iterated(forms::mul(forms::power(ctx.riemann, k - 1), rdot), 2 * k - 1);
  term2 *= static_cast<double>(k);

  term1 += term2;
  return curvature::matrix_from_form11(term1);
}

// ---------------------------------------------------------------------------
// Bianchi-type operators on fields
// ---------------------------------------------------------------------------

// Chart-component field of an orthonormal-frame pointwise operator.
using PointOperator =
    std::function<std::vector<double>(const DeformationContext&)>;  // returns orthonormal n*n

inline curvature::MatrixFieldFn operator_chart_field(const fields::MetricFamily& family,
                                                     const fields::SymTensorField& h,
                                                     const PointOperator& op) {
  auto fam = family;
  auto hf = h;
  return [fam, hf, op](const std::vector<double>& p) {
    const auto ctx = DeformationContext::build(fam, hf, p);
    const auto on = op(ctx);
    const int n = ctx.n;
    // t_chart = F^{-T} t_on F^{-1}
    const auto finv = linalg::inverse(ctx.frame.frame, n);
    std::vector<double> tmp(static_cast<std::size_t>(n) * n, 0.0), out(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0;
        for (int a = 0; a < n; ++a) acc += finv[static_cast<std::size_t>(a * n + i)] * on[static_cast<std::size_t>(a * n + j)];
        tmp[static_cast<std::size_t>(i * n + j)] = acc;
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0;
        for (int b = 0; b < n; ++b) acc += tmp[static_cast<std::size_t>(i * n + b)] * finv[static_cast<std::size_t>(b * n + j)];
        out[static_cast<std::size_t>(i * n + j)] = acc;
      }
    return out;
  };
}

// delta_g h as a chart 1-form field (jet-based, no stencil).
inline std::function<std::vector<double>(const std::vector<double>&)> divergence_field(
    const fields::MetricFamily& family, const fields::SymTensorField& h) {
  auto fam = family;
  auto hf = h;
  return [fam, hf](const std::vector<double>& p) {
    const int n = fam.n();
    const auto seeds = seed_point(p, 2);
    const auto m = geometry::MetricJets::at(fam, seeds);
    const auto hj = hf.eval_jets(seeds);
    const auto grad = geometry::covariant1_sym(hj, m.gamma, n);
    const auto div = geometry::divergence_sym(grad, m.ginv, n);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = div[static_cast<std::size_t>(i)].value();
    return out;
  };
}

// The elliptic operator on 1-forms G = delta delta* - (1/2) d delta, applied
// to a chart 1-form field via one finite-difference layer.
inline std::vector<double> g_operator_fd(
    const fields::MetricFamily& family,
    const std::function<std::vector<double>(const std::vector<double>&)>& omega,
    const std::vector<double>& x, double step) {
  const int n = family.n();
  auto fam = family;
  // delta* omega as a chart matrix field (one FD layer inside).
  curvature::MatrixFieldFn delta_star_field = [fam, omega, step, n](const std::vector<double>& p) {
    const auto seeds = seed_point(p, 1);
    const auto m = geometry::MetricJets::at(fam, seeds);
    // FD the 1-form components around p.
    std::vector<double> grad_w(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a) {
      auto pp = p, pm = p;
      pp[static_cast<std::size_t>(a)] += step;
      pm[static_cast<std::size_t>(a)] -= step;
      const auto wp = omega(pp), wm = omega(pm);
      for (int i = 0; i < n; ++i)
        grad_w[static_cast<std::size_t>(a * n + i)] =
            (wp[static_cast<std::size_t>(i)] - wm[static_cast<std::size_t>(i)]) / (2 * step);
    }
    const auto w0 = omega(p);
    std::vector<double> cov(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i) {
        double acc = grad_w[static_cast<std::size_t>(a * n + i)];
        for (int mm = 0; mm < n; ++mm)
          acc -= m.gamma[static_cast<std::size_t>((mm * n + a) * n + i)].value() * w0[static_cast<std::size_t>(mm)];
        cov[static_cast<std::size_t>(a * n + i)] = acc;
      }
    std::vector<double> out(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(i * n + j)] =
            0.5 * (cov[static_cast<std::size_t>(i * n + j)] + cov[static_cast<std::size_t>(j * n + i)]);
    return out;
  };
  auto delta_delta_star = curvature::divergence_fd(family, delta_star_field, x, step);

  // delta omega as a scalar field: -g^{ai} (nabla_a w)_i.
  curvature::ScalarFieldFn delta_omega = [fam, omega, step, n](const std::vector<double>& p) {
    const auto seeds = seed_point(p, 1);
    const auto m = geometry::MetricJets::at(fam, seeds);
    std::vector<double> grad_w(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a) {
      auto pp = p, pm = p;
      pp[static_cast<std::size_t>(a)] += step;
      pm[static_cast<std::size_t>(a)] -= step;
      const auto wp = omega(pp), wm = omega(pm);
      for (int i = 0; i < n; ++i)
        grad_w[static_cast<std::size_t>(a * n + i)] =
            (wp[static_cast<std::size_t>(i)] - wm[static_cast<std::size_t>(i)]) / (2 * step);
    }
    const auto w0 = omega(p);
    double acc = 0;
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i) {
        double cov = grad_w[static_cast<std::size_t>(a * n + i)];
        for (int mm = 0; mm < n; ++mm)
          cov -= m.gamma[static_cast<std::size_t>((mm * n + a) * n + i)].value() * w0[static_cast<std::size_t>(mm)];
        acc -= m.ginv[static_cast<std::size_t>(a * n + i)].value() * cov;
      }
    return acc;
  };
  const auto d_delta = curvature::gradient_fd(delta_omega, x, step);

  for (int i = 0; i < n; ++i) delta_delta_star[static_cast<std::size_t>(i)] -= 0.5 * d_delta[static_cast<std::size_t>(i)];
  return delta_delta_star;
}

// ---------------------------------------------------------------------------
// Rayleigh quotient on a round sphere
// ---------------------------------------------------------------------------

struct RayleighReport {
  double numerator = 0;       // int <L h, h>
  double denominator = 0;     // int |h|^2
  double quotient = 0;
  double bound = 0;           // (n-2k) C_{n,k} mu^k
  double ibp_residual = 0;    // relative | int <n*n h, h> - int |nabla h|^2 |
  double trace_residual = 0;  // sqrt(int (tr h)^2 / int |h|^2)
  double divergence_residual = 0;  // sqrt(int |delta h|^2 / int |h|^2)
  double margin = 0;               // documented residual-dependent slack
  bool bound_applicable = false;   // residuals small enough to assert
  bool bound_satisfied = false;
  double grad_energy = 0;  // int |nabla h|^2
};

inline RayleighReport rayleigh_quotient(const fields::MetricFamily& sphere,
                                        const fields::SymTensorField& h, int k,
                                        const fields::SphereQuadrature& quad,
                                        double residual_gate = 1e-3) {
  const int n = sphere.n();
  if (!sphere.is_space_form() || sphere.mu() <= 0)
    throw std::domain_error("rayleigh_quotient: need a round sphere background");
  if (2 * k >= n) throw std::domain_error("rayleigh_quotient: need 2k < n");
  RayleighReport rep;
  rep.bound = (n - 2 * k) * curvature::dimension_constant(n, k) * std::pow(sphere.mu(), k);

  double num = 0, den = 0, boch_h = 0, grad2 = 0, tr2 = 0, div2 = 0;
  for (const auto& node : quad.nodes()) {
    const auto ctx = DeformationContext::build(sphere, h, node.x);
    const auto lh = stability_operator(ctx, k);
    double lh_h = 0, h2 = 0, bh = 0, g2 = 0, d2 = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        lh_h += lh[static_cast<std::size_t>(i * n + j)] * ctx.h[static_cast<std::size_t>(i * n + j)];
        h2 += ctx.h[static_cast<std::size_t>(i * n + j)] * ctx.h[static_cast<std::size_t>(i * n + j)];
        bh += ctx.bochner_h[static_cast<std::size_t>(i * n + j)] * ctx.h[static_cast<std::size_t>(i * n + j)];
      }
    for (std::size_t t = 0; t < ctx.grad_h.size(); ++t) g2 += ctx.grad_h[t] * ctx.grad_h[t];
    for (double v : ctx.delta_h) d2 += v * v;
    num += node.weight * lh_h;
    den += node.weight * h2;
    boch_h += node.weight * bh;
    grad2 += node.weight * g2;
    tr2 += node.weight * ctx.tr_h * ctx.tr_h;
    div2 += node.weight * d2;
  }
  if (den <= 0) throw std::domain_error("rayleigh_quotient: zero deformation rejected");
  rep.numerator = num;
  rep.denominator = den;
  rep.quotient = num / den;
  rep.grad_energy = grad2;
  rep.ibp_residual = std::fabs(boch_h - grad2) / std::max(grad2, 1e-300);
  rep.trace_residual = std::sqrt(tr2 / den);
  rep.divergence_residual = std::sqrt(div2 / den);

  // For trace-free h the divergence term enters the quotient exactly as
  // -(n-2k) C mu^{k-1} |delta h|^2; the margin charges that plus a linear
  // slack in the trace residual.
  const double cmu = curvature::dimension_constant(n, k) * std::pow(sphere.mu(), k - 1);
  rep.margin = (n - 2 * k) * cmu * (div2 / den) +
               10.0 * (std::fabs(cmu) * (k > 1 ? 1.0 : 0.0) + sphere.mu() * n) * rep.trace_residual;
  rep.bound_applicable = rep.trace_residual < residual_gate && rep.divergence_residual < residual_gate;
  rep.bound_satisfied = rep.quotient >= rep.bound - rep.margin - 1e-9;
  return rep;
}

}  // namespace lovelock::linearization
