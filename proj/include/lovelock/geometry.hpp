// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lovelock/fields.hpp"
#include "lovelock/jet.hpp"
#include "lovelock/linalg.hpp"

namespace lovelock::geometry {

// Chart-coordinate covariant calculus on jet-valued component tables. All
// partial derivatives come from jet coefficient extraction, so evaluating a
// formula at seed order m leaves exact derivatives up to the order budget;
// each covariant-derivative layer costs one order.

inline std::vector<Jet> inverse_gram(const std::vector<Jet>& g, int n) {
  return linalg::inverse<Jet>(g, n, Jet::constant(g.front().space(), 1.0),
                              [](const Jet& j) { return std::fabs(j.value()); });
}

// Christoffel symbols Gamma^k_{ij}, indexed [k][i][j]; one order below g.
inline std::vector<Jet> christoffels(const std::vector<Jet>& g, const std::vector<Jet>& ginv, int n) {
  const auto idx2 = [n](int i, int j) { return static_cast<std::size_t>(i * n + j); };
  std::vector<Jet> dg(static_cast<std::size_t>(n) * n * n);  // [a][i][j] = d_a g_ij
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dg[static_cast<std::size_t>((a * n + i) * n + j)] = g[idx2(i, j)].derivative(a);
  const int ord = dg.front().order();
  std::vector<Jet> gamma(static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet acc = Jet::constant(JetSpace::get(g.front().space()->nvars, ord), 0.0);
        for (int l = 0; l < n; ++l) {
          const Jet sum = dg[static_cast<std::size_t>((i * n + j) * n + l)] +
                          dg[static_cast<std::size_t>((j * n + i) * n + l)] -
                          dg[static_cast<std::size_t>((l * n + i) * n + j)];
          acc += ginv[idx2(k, l)] * sum;
        }
        gamma[static_cast<std::size_t>((k * n + i) * n + j)] = acc * 0.5;
      }
  return gamma;
}

// Curvature as a (2,2) bilinear form on wedge pairs, chart components
// indexed [mu][nu][sigma][tau]. The sign is pinned so that constant-curvature
// metrics satisfy R = (mu/2) g^2 under the shuffle product.
inline std::vector<Jet> riemann_double_form(const std::vector<Jet>& g, const std::vector<Jet>& gamma,
                                            int n) {
  const auto gidx = [n](int k, int i, int j) { return static_cast<std::size_t>((k * n + i) * n + j); };
  // dGamma[a][k][i][j] = d_a Gamma^k_{ij}
  std::vector<Jet> dgamma(static_cast<std::size_t>(n) * n * n * n);
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          dgamma[static_cast<std::size_t>(((a * n + k) * n + i) * n + j)] = gamma[gidx(k, i, j)].derivative(a);
  const int ord = dgamma.front().order();
  const auto zero = Jet::constant(JetSpace::get(g.front().space()->nvars, ord), 0.0);

  // R^rho_{sigma mu nu} = d_mu G^rho_{nu sigma} - d_nu G^rho_{mu sigma}
  //                       + G^rho_{mu l} G^l_{nu sigma} - G^rho_{nu l} G^l_{mu sigma}
  std::vector<Jet> rup(static_cast<std::size_t>(n) * n * n * n, zero);
  for (int rho = 0; rho < n; ++rho)
    for (int sigma = 0; sigma < n; ++sigma)
      for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu) {
          Jet acc = dgamma[static_cast<std::size_t>(((mu * n + rho) * n + nu) * n + sigma)] -
                    dgamma[static_cast<std::size_t>(((nu * n + rho) * n + mu) * n + sigma)];
          for (int l = 0; l < n; ++l)
            acc += gamma[gidx(rho, mu, l)] * gamma[gidx(l, nu, sigma)] -
                   gamma[gidx(rho, nu, l)] * gamma[gidx(l, mu, sigma)];
          rup[static_cast<std::size_t>(((rho * n + sigma) * n + mu) * n + nu)] = acc;
        }

  // R(d_mu ^ d_nu, d_sigma ^ d_tau) = - g_{tau rho} R^rho_{sigma mu nu}
  std::vector<Jet> rdd(static_cast<std::size_t>(n) * n * n * n, zero);
  for (int mu = 0; mu < n; ++mu)
    for (int nu = 0; nu < n; ++nu)
      for (int sigma = 0; sigma < n; ++sigma)
        for (int tau = 0; tau < n; ++tau) {
          Jet acc = zero;
          for (int rho = 0; rho < n; ++rho)
            acc += g[static_cast<std::size_t>(tau * n + rho)] *
                   rup[static_cast<std::size_t>(((rho * n + sigma) * n + mu) * n + nu)];
          rdd[static_cast<std::size_t>(((mu * n + nu) * n + sigma) * n + tau)] = -acc;
        }
  return rdd;
}

// First covariant derivative of a symmetric 2-tensor, [a][i][j] = (nabla_a h)_{ij}.
inline std::vector<Jet> covariant1_sym(const std::vector<Jet>& h, const std::vector<Jet>& gamma, int n) {
  const auto gidx = [n](int k, int i, int j) { return static_cast<std::size_t>((k * n + i) * n + j); };
  std::vector<Jet> out(static_cast<std::size_t>(n) * n * n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet acc = h[static_cast<std::size_t>(i * n + j)].derivative(a);
        for (int m = 0; m < n; ++m)
          acc -= gamma[gidx(m, a, i)] * h[static_cast<std::size_t>(m * n + j)] +
                 gamma[gidx(m, a, j)] * h[static_cast<std::size_t>(i * n + m)];
        out[static_cast<std::size_t>((a * n + i) * n + j)] = acc;
      }
  return out;
}

// Second covariant derivative, [a][b][i][j] = (nabla^2_{a,b} h)_{ij}
//   = nabla_a (nabla h)_{b i j} with the connection acting on all three slots.
inline std::vector<Jet> covariant2_sym(const std::vector<Jet>& grad_h, const std::vector<Jet>& gamma,
                                       int n) {
  const auto gidx = [n](int k, int i, int j) { return static_cast<std::size_t>((k * n + i) * n + j); };
  std::vector<Jet> out(static_cast<std::size_t>(n) * n * n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Jet acc = grad_h[static_cast<std::size_t>((b * n + i) * n + j)].derivative(a);
          for (int m = 0; m < n; ++m)
            acc -= gamma[gidx(m, a, b)] * grad_h[static_cast<std::size_t>((m * n + i) * n + j)] +
                   gamma[gidx(m, a, i)] * grad_h[static_cast<std::size_t>((b * n + m) * n + j)] +
                   gamma[gidx(m, a, j)] * grad_h[static_cast<std::size_t>((b * n + i) * n + m)];
          out[static_cast<std::size_t>(((a * n + b) * n + i) * n + j)] = acc;
        }
  return out;
}

// Covariant derivative of a 1-form, [a][i] = (nabla_a w)_i.
inline std::vector<Jet> covariant1_oneform(const std::vector<Jet>& w, const std::vector<Jet>& gamma,
                                           int n) {
  const auto gidx = [n](int k, int i, int j) { return static_cast<std::size_t>((k * n + i) * n + j); };
  std::vector<Jet> out(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i) {
      Jet acc = w[static_cast<std::size_t>(i)].derivative(a);
      for (int m = 0; m < n; ++m) acc -= gamma[gidx(m, a, i)] * w[static_cast<std::size_t>(m)];
      out[static_cast<std::size_t>(a * n + i)] = acc;
    }
  return out;
}

// Divergence of a symmetric 2-tensor with the sign (delta h)_j = - g^{ab} (nabla_a h)_{bj}.
inline std::vector<Jet> divergence_sym(const std::vector<Jet>& grad_h, const std::vector<Jet>& ginv,
                                       int n) {
  std::vector<Jet> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    Jet acc = grad_h.front() * 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        acc -= ginv[static_cast<std::size_t>(a * n + b)] * grad_h[static_cast<std::size_t>((a * n + b) * n + j)];
    out[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

// Symmetrized covariant derivative of a 1-form: (delta* w)_{ij} = (nabla_i w_j + nabla_j w_i) / 2.
inline std::vector<Jet> delta_star_oneform(const std::vector<Jet>& grad_w, int n) {
  std::vector<Jet> out(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i * n + j)] =
          (grad_w[static_cast<std::size_t>(i * n + j)] + grad_w[static_cast<std::size_t>(j * n + i)]) * 0.5;
  return out;
}

// Metric trace g^{ij} t_ij.
inline Jet trace_sym(const std::vector<Jet>& t, const std::vector<Jet>& ginv, int n) {
  Jet acc = t.front() * 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      acc += ginv[static_cast<std::size_t>(i * n + j)] * t[static_cast<std::size_t>(i * n + j)];
  return acc;
}

// Bundled chart-point data for a metric family.
struct MetricJets {
  int n = 0;
  std::vector<Jet> g, ginv, gamma;

  static MetricJets at(const fields::MetricFamily& family, const std::vector<Jet>& x) {
    MetricJets m;
    m.n = family.n();
    m.g = family.gram_jets_at(x);
    m.ginv = inverse_gram(m.g, m.n);
    if (x.front().order() >= 1) m.gamma = christoffels(m.g, m.ginv, m.n);
    return m;
  }
};

// The deformation field h = delta* w of a 1-form field: the infinitesimal
// action of the diffeomorphism flow of the dual vector field. Built as a
// jet-evaluable field so it can feed any downstream operator.
inline fields::SymTensorField lie_deformation_field(const fields::MetricFamily& family,
                                                    const fields::OneFormField& omega) {
  auto fam = family;
  auto w = omega;
  const int n = family.n();
  return fields::SymTensorField(
      "delta_star(" + omega.name() + ")", n, [fam, w, n](const std::vector<Jet>& x) {
        const auto m = MetricJets::at(fam, x);
        const auto wj = w.eval_jets(x);
        const auto grad_w = covariant1_oneform(wj, m.gamma, n);
        return delta_star_oneform(grad_w, n);
      });
}

}  // namespace lovelock::geometry
