// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <future>
#include <limits>
#include <thread>

#include "lovelock/linearization.hpp"
#include "lovelock/report.hpp"

namespace lovelock::cli {

using fields::MetricFamily;
using fields::SymTensorField;
using forms::DoubleForm;
using linearization::DeformationContext;

struct CheckDef {
  std::string id;
  std::string suite;
  std::string identity;
  std::function<void(const RunConfig&, CheckReport&)> run;
};

namespace detail {

inline double tol_or(const RunConfig& cfg, double fallback) { return cfg.tol > 0 ? cfg.tol : fallback; }

inline DoubleForm<Rational> random_rational_form(Rng& rng, int n, int p, int q) {
  DoubleForm<Rational> w(n, p, q);
  for (auto& c : w.components()) c = Rational(rng.int_range(-24, 24), 12);
  return w;
}

// The space-form family selected by the config, falling back to the round
// sphere when the configured family has no constant curvature.
inline MetricFamily config_space_form(const RunConfig& cfg) {
  if (cfg.family == "sphere") return fields::round_sphere_stereographic(cfg.n, cfg.mu);
  if (cfg.family == "sphere_angles") return fields::round_sphere_angles(cfg.n, cfg.mu);
  if (cfg.family == "hyperbolic") return fields::hyperbolic_ball(cfg.n, cfg.mu < 0 ? cfg.mu : -cfg.mu);
  if (cfg.family == "torus") return fields::flat_torus(cfg.n);
  return fields::round_sphere_stereographic(cfg.n, cfg.mu);
}

inline MetricFamily config_family(const RunConfig& cfg) {
  if (cfg.family == "perturbed_torus") return fields::perturbed(fields::flat_torus(cfg.n), cfg.eps, cfg.seed);
  if (cfg.family == "product")
    return fields::builtin("product", cfg.n, {{"r", 2.0}, {"mu", 1.0}, {"eps", 0.1}, {"seed", static_cast<double>(cfg.seed)}});
  return config_space_form(cfg);
}

inline void base_params(const RunConfig& cfg, CheckReport& rep) {
  rep.params["seed"] = static_cast<double>(cfg.seed);
  rep.params["eps"] = cfg.eps;
  rep.params["fd_step"] = cfg.fd_step;
  rep.params["quad_nodes"] = cfg.quad_nodes;
}

inline double matrix_max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

inline std::vector<double> matrix_diff(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

}  // namespace detail

inline std::vector<CheckDef> check_registry() {
  using namespace detail;
  std::vector<CheckDef> defs;
  auto add = [&defs](std::string id, std::string suite, std::string identity,
                     std::function<void(const RunConfig&, CheckReport&)> fn) {
    defs.push_back({std::move(id), std::move(suite), std::move(identity), std::move(fn)});
  };

  // ---------------------------------------------------------------- algebra
  add("algebra.product.metric_square", "algebra", "shuffle product: (g^2)(e1^e2, e1^e2) = 2",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = 0;
        double res = 0;
        for (int n = 2; n <= 6; ++n) {
          const auto g2 = forms::mul(forms::metric_identity<Rational>(n), forms::metric_identity<Rational>(n));
          res = std::max(res, std::fabs((g2.get({0, 1}, {0, 1}) - Rational(2)).to_double()));
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
        (void)cfg;
      });

  add("algebra.product.associativity", "algebra", "shuffle product is associative (exact)",
      [](const RunConfig& cfg, CheckReport& rep) {
        Rng rng(cfg.seed, "algebra.product.associativity");
        rep.tolerance = 0;
        double res = 0;
        for (int rep_i = 0; rep_i < 100; ++rep_i) {
          const int n = static_cast<int>(rng.int_range(2, 5));
          const auto a = random_rational_form(rng, n, 1, 1);
          const auto b = random_rational_form(rng, n, static_cast<int>(rng.int_range(0, 2)),
                                              static_cast<int>(rng.int_range(0, 2)));
          const auto c = random_rational_form(rng, n, 1, 1);
          res = std::max(res, (forms::mul(a, forms::mul(b, c)) - forms::mul(forms::mul(a, b), c)).max_abs());
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("algebra.product.graded_commutativity", "algebra",
      "shuffle product is graded-commutative (exact)", [](const RunConfig& cfg, CheckReport& rep) {
        Rng rng(cfg.seed, "algebra.product.graded_commutativity");
        rep.tolerance = 0;
        double res = 0;
        for (int rep_i = 0; rep_i < 100; ++rep_i) {
          const int n = static_cast<int>(rng.int_range(2, 5));
          const int pa = static_cast<int>(rng.int_range(0, 2)), qa = static_cast<int>(rng.int_range(0, 2));
          const int pb = static_cast<int>(rng.int_range(0, 2)), qb = static_cast<int>(rng.int_range(0, 2));
          const auto a = random_rational_form(rng, n, pa, qa);
          const auto b = random_rational_form(rng, n, pb, qb);
          auto ba = forms::mul(b, a);
          if ((pa * pb + qa * qb) % 2 != 0) ba *= Rational(-1);
          res = std::max(res, (forms::mul(a, b) - ba).max_abs());
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("algebra.contract.metric_powers", "algebra", "c(g^m) = m (n-m+1) g^{m-1} (exact)",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = 0;
        double res = 0;
        for (int n = 2; n <= 8; ++n)
          for (int m = 1; m <= std::min(4, n); ++m) {
            const auto g = forms::metric_identity<Rational>(n);
            auto rhs = forms::power(g, m - 1);
            rhs *= Rational(m * (n - m + 1));
            res = std::max(res, (forms::contract(forms::power(g, m)) - rhs).max_abs());
          }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
        (void)cfg;
      });

  add("algebra.adjointness", "algebra",
      "multiplication by g and contraction are adjoint: <g w, t> = <w, c t> (exact, 500 cases)",
      [](const RunConfig& cfg, CheckReport& rep) {
        Rng rng(cfg.seed, "algebra.adjointness");
        rep.tolerance = 0;
        double res = 0;
        for (int rep_i = 0; rep_i < 500; ++rep_i) {
          const int n = static_cast<int>(rng.int_range(2, 8));
          const int p = static_cast<int>(rng.int_range(1, 3));
          const int q = static_cast<int>(rng.int_range(1, 3));
          if (p > n || q > n) continue;
          const auto w = random_rational_form(rng, n, p - 1, q - 1);
          const auto t = random_rational_form(rng, n, p, q);
          const auto g = forms::metric_identity<Rational>(n);
          const auto lhs = forms::inner(forms::mul(g, w), t);
          const auto rhs = forms::inner(w, forms::contract(t));
          res = std::max(res, std::fabs((lhs - rhs).to_double()));
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("algebra.commutation.single", "algebra",
      "single contraction against g: c(g w) = g(c w) + (n-p-q) w (exact)",
      [](const RunConfig& cfg, CheckReport& rep) {
        Rng rng(cfg.seed, "algebra.commutation.single");
        rep.tolerance = 0;
        double res = 0;
        for (int rep_i = 0; rep_i < 200; ++rep_i) {
          const int n = static_cast<int>(rng.int_range(2, 8));
          const int p = static_cast<int>(rng.int_range(0, 3));
          const int q = static_cast<int>(rng.int_range(0, 3));
          const auto w = random_rational_form(rng, n, p, q);
          res = std::max(res, forms::commutation_residual(w, 1, 1).max_abs());
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("algebra.commutation.general", "algebra",
      "iterated contraction/metric-power commutation identity (exact, 500 cases)",
      [](const RunConfig& cfg, CheckReport& rep) {
        Rng rng(cfg.seed, "algebra.commutation.general");
        rep.tolerance = 0;
        double res = 0;
        for (int rep_i = 0; rep_i < 500; ++rep_i) {
          const int n = static_cast<int>(rng.int_range(2, 8));
          const int p = static_cast<int>(rng.int_range(0, std::min(3, n)));
          const int q = static_cast<int>(rng.int_range(0, std::min(3, n)));
          const int l = static_cast<int>(rng.int_range(0, 3));
          const int m = static_cast<int>(rng.int_range(0, 3));
          const auto w = random_rational_form(rng, n, p, q);
          res = std::max(res, forms::commutation_residual(w, l, m).max_abs());
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("algebra.symmetry.projection", "algebra",
      "factor-swap projection is idempotent and survives contraction (exact)",
      [](const RunConfig& cfg, CheckReport& rep) {
        Rng rng(cfg.seed, "algebra.symmetry.projection");
        rep.tolerance = 0;
        double res = 0;
        for (int rep_i = 0; rep_i < 50; ++rep_i) {
          const int n = static_cast<int>(rng.int_range(2, 6));
          const auto s = forms::sym_project(random_rational_form(rng, n, 2, 2));
          res = std::max(res, (forms::sym_project(s) - s).max_abs());
          res = std::max(res, forms::symmetry_residual(forms::contract(s)));
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  // -------------------------------------------------------------- curvature
  add("curvature.space_form.riemann", "curvature",
      "constant-curvature metrics satisfy R = (mu/2) g^2 at 100 random points",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-9);
        Rng rng(cfg.seed, "curvature.space_form.riemann");
        double res = 0;
        const std::vector<MetricFamily> fams{fields::round_sphere_stereographic(3, 1.0),
                                             fields::round_sphere_stereographic(5, 1.0),
                                             fields::hyperbolic_ball(3, -1.0)};
        for (const auto& fam : fams) {
          const auto g = forms::metric_identity<double>(fam.n());
          const auto half_g2 = forms::mul(g, g) * (fam.mu() / 2);
          for (int i = 0; i < 100; ++i) {
            const auto x = fam.chart().random_point(rng);
            const auto pack = curvature::curvature_at(fam, x, 1);
            res = std::max(res, (pack.riemann - half_g2).max_abs());
            res = std::max(res, forms::symmetry_residual(pack.riemann));
          }
        }
        rep.params["n"] = 3;
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("curvature.space_form.contractions", "curvature",
      "Ricci = (n-1) mu g and scalar = n(n-1) mu on space forms",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-9);
        const auto fam = config_space_form(cfg);
        Rng rng(cfg.seed, "curvature.space_form.contractions");
        double res = 0;
        for (int i = 0; i < 10; ++i) {
          const auto x = fam.chart().random_point(rng);
          const auto pack = curvature::curvature_at(fam, x, 1);
          const auto expected = forms::metric_identity<double>(fam.n()) * ((fam.n() - 1) * fam.mu());
          res = std::max(res, (pack.ricci - expected).max_abs());
          res = std::max(res, std::fabs(pack.scalar - fam.n() * (fam.n() - 1) * fam.mu()));
        }
        rep.params["n"] = fam.n();
        rep.params["mu"] = fam.mu();
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("curvature.lovelock.sphere_constants", "curvature",
      "sphere invariants match the exact contraction oracle and the closed-form lambda",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-9);
        Rng rng(cfg.seed, "curvature.lovelock.sphere_constants");
        double res = 0;
        struct NK {
          int n, k;
        };
        for (const auto t : {NK{5, 2}, NK{6, 2}, NK{7, 2}, NK{7, 3}}) {
          const auto fam = fields::round_sphere_stereographic(t.n, 1.0);
          const auto x = fam.chart().random_point(rng);
          const auto pack = curvature::curvature_at(fam, x, t.k);
          const double lambda = curvature::space_form_lambda(t.n, t.k, 1.0);
          res = std::max(res, std::fabs(pack.lambda - lambda) / lambda);
          // Exact rational oracle: R = g^2/2, iterated contraction.
          auto rk = forms::power(forms::metric_identity<Rational>(t.n), 2 * t.k);
          rk *= Rational(1, 1 << t.k);
          const auto ricci_diag = forms::contract_iterated(rk, 2 * t.k - 1).at(0, 0);
          const auto s2k = forms::contract_iterated(rk, 2 * t.k).at(0, 0) / Rational(factorial(2 * t.k));
          const auto expected = forms::metric_identity<double>(t.n) * ricci_diag.to_double();
          res = std::max(res, (pack.lovelock_ricci - expected).max_abs() / ricci_diag.to_double());
          res = std::max(res, std::fabs(pack.lovelock_scalar - s2k.to_double()) / s2k.to_double());
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("curvature.lovelock.trace_identity", "curvature",
      "tr R^{(2k)} = (2k)! S^{(2k)} on generic and symmetric metrics",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-9);
        Rng rng(cfg.seed, "curvature.lovelock.trace_identity");
        double res = 0;
        const std::vector<MetricFamily> fams{fields::perturbed(fields::flat_torus(5), 0.05, cfg.seed),
                                             fields::round_sphere_stereographic(5, 1.0),
                                             fields::hyperbolic_ball(6, -1.0)};
        for (const auto& fam : fams)
          for (int i = 0; i < 5; ++i) {
            const auto x = fam.chart().random_point(rng);
            for (int k = 1; 2 * k <= fam.n() && k <= 3; ++k) {
              const auto pack = curvature::curvature_at(fam, x, k);
              res = std::max(res, std::fabs(pack.trace_identity_residual));
            }
          }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("curvature.flat.vanishing", "curvature", "flat tori have vanishing curvature stack",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-12);
        Rng rng(cfg.seed, "curvature.flat.vanishing");
        const auto fam = fields::flat_torus(5);
        double res = 0;
        for (int i = 0; i < 10; ++i) {
          const auto x = fam.chart().random_point(rng);
          const auto pack = curvature::curvature_at(fam, x, 2);
          res = std::max(res, pack.riemann.max_abs());
          res = std::max(res, pack.lovelock_ricci.max_abs());
          res = std::max(res, std::fabs(pack.lovelock_scalar));
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("curvature.product.einstein", "curvature",
      "products of any 2-manifold with flat tori are 4-Einstein with lambda = 0 (three seeds)",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-8);
        Rng rng(cfg.seed, "curvature.product.einstein");
        double res = 0;
        for (std::uint64_t s = 1; s <= 3; ++s) {
          const auto fam = fields::product(
              fields::perturbed(fields::round_sphere_stereographic(2, 1.0), 0.1, cfg.seed + s),
              fields::flat_torus(3));
          for (int i = 0; i < 10; ++i) {
            const auto x = fam.chart().random_point(rng);
            const auto defect = curvature::einstein_defect(fam, x, 2);
            res = std::max(res, defect.max_abs());
          }
        }
        rep.params["n"] = 5;
        rep.params["k"] = 2;
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("curvature.space_form.defect", "curvature",
      "space forms are 2k-Einstein: the pointwise defect R^{(2k)} - lambda g vanishes",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-9);
        Rng rng(cfg.seed, "curvature.space_form.defect");
        double res = 0;
        const std::vector<MetricFamily> fams{fields::round_sphere_stereographic(5, 1.0),
                                             fields::hyperbolic_ball(5, -1.0)};
        for (const auto& fam : fams)
          for (int i = 0; i < 10; ++i) {
            const auto x = fam.chart().random_point(rng);
            res = std::max(res, curvature::einstein_defect(fam, x, 2).max_abs());
          }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("curvature.divergence.metric", "curvature",
      "divergence rules: delta g = 0 and delta(f g) = -df",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-6);
        const auto fam = fields::perturbed(fields::flat_torus(4), 0.1, cfg.seed);
        Rng rng(cfg.seed, "curvature.divergence.metric");
        const auto x = fam.chart().random_point(rng);
        curvature::MatrixFieldFn gf = [&fam](const std::vector<double>& p) { return fam.gram(p); };
        double res = detail::matrix_max_abs(curvature::divergence_fd(fam, gf, x, cfg.fd_step));
        auto f = [](const std::vector<double>& p) {
          return 0.7 + 0.3 * std::sin(p[0] + 2 * p[1]) * std::cos(p[2]) + 0.2 * std::sin(p[3]);
        };
        curvature::MatrixFieldFn fg = [&fam, f](const std::vector<double>& p) {
          auto g = fam.gram(p);
          const double s = f(p);
          for (auto& v : g) v *= s;
          return g;
        };
        const auto div_fg = curvature::divergence_fd(fam, fg, x, cfg.fd_step);
        const auto df = curvature::gradient_fd(f, x, cfg.fd_step);
        for (int j = 0; j < 4; ++j)
          res = std::max(res, std::fabs(div_fg[static_cast<std::size_t>(j)] + df[static_cast<std::size_t>(j)]));
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("curvature.divergence.lovelock", "curvature",
      "the Einstein-Lovelock tensor is divergence free: delta R^{(4)} + 3! dS^{(4)} -> 0 at "
      "second order in the stencil step",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-5);
        const auto fam = fields::perturbed(fields::flat_torus(5), 0.05, cfg.seed);
        Rng rng(cfg.seed, "curvature.divergence.lovelock");
        const auto x = fam.chart().random_point(rng);
        const std::vector<double> steps{2e-2, 1e-2, 5e-3};
        std::vector<double> errs;
        for (const double s : steps)
          errs.push_back(curvature::one_form_norm(fam, x, curvature::lovelock_divergence_residual(fam, x, 2, s)));
        rep.convergence_slope = linalg::loglog_slope(steps, errs);
        rep.slope_low = 1.8;
        rep.slope_high = 2.2;
        rep.residual =
            curvature::one_form_norm(fam, x, curvature::lovelock_divergence_residual(fam, x, 2, cfg.fd_step));
        rep.params["n"] = 5;
        rep.params["k"] = 2;
        rep.pass = rep.residual <= rep.tolerance && *rep.convergence_slope >= *rep.slope_low &&
                   *rep.convergence_slope <= *rep.slope_high;
      });

  // ---------------------------------------------------------- linearization
  add("linearization.volume_element", "linearization",
      "volume element linearization: d/dt vol(g + t h) = (1/2) tr_g h vol(g)",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-8);
        const auto fam = fields::perturbed(fields::flat_torus(4), 0.1, cfg.seed);
        const auto h = fields::random_sym_field(cfg.seed + 1, 4, 1, 0.7);
        Rng rng(cfg.seed, "linearization.volume_element");
        const auto x = fam.chart().random_point(rng);
        const auto g = fam.gram(x);
        const auto hv = h.eval(x);
        const double t = 1e-5;
        auto det_at = [&](double tt) {
          auto m = g;
          for (std::size_t i = 0; i < m.size(); ++i) m[i] += tt * hv[i];
          return std::sqrt(linalg::determinant(m, 4));
        };
        const double fd = (det_at(t) - det_at(-t)) / (2 * t * det_at(0.0));
        rep.residual = std::fabs(fields::volume_linearization(fam, h, x) - fd);
        rep.pass = rep.residual <= rep.tolerance;
      });

  add("linearization.mul_operator.power_rule", "linearization",
      "deformation multiplier on metric powers: F_h(g^p) = 2p g^{p-1} h",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-10);
        const auto fam = fields::round_sphere_stereographic(5, 1.0);
        const auto h = fields::random_sym_field(cfg.seed, 5, 1, 0.8);
        Rng rng(cfg.seed, "linearization.mul_operator.power_rule");
        const auto x = fam.chart().random_point(rng);
        const auto ctx = DeformationContext::build(fam, h, x);
        const auto g = forms::metric_identity<double>(5);
        double res = 0;
        for (int p = 1; p <= 3; ++p) {
          auto rhs = forms::mul(forms::power(g, p - 1), ctx.h_form());
          rhs *= 2.0 * p;
          res = std::max(res, (linearization::f_mul(ctx.h, forms::power(g, p)) - rhs).max_abs());
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.mul_operator.contractions", "linearization",
      "contractions of F_h(R): c F_h(R) = Ric o h + h o Ric + 2 K h, c^2 F_h(R) = 4 <Ric,h>",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-9);
        Rng rng(cfg.seed, "linearization.mul_operator.contractions");
        double res = 0;
        const std::vector<MetricFamily> fams{fields::perturbed(fields::flat_torus(4), 0.15, cfg.seed),
                                             fields::round_sphere_stereographic(4, 1.0)};
        for (const auto& fam : fams)
          for (int i = 0; i < 25; ++i) {
            const int n = fam.n();
            const auto h = fields::random_sym_field(cfg.seed + 10 + i, n, 1, 0.6);
            const auto x = fam.chart().random_point(rng);
            const auto ctx = DeformationContext::build(fam, h, x);
            const auto f_r = linearization::f_mul(ctx.h, ctx.riemann);
            const auto ric = curvature::matrix_from_form11(ctx.ricci);
            auto closed = linearization::compose_sym(ric, ctx.h, n);
            const auto hr = linearization::compose_sym(ctx.h, ric, n);
            const auto kh = linearization::curvature_action(ctx.riemann, ctx.h, n);
            double ric_h = 0;
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b) ric_h += ric[static_cast<std::size_t>(a * n + b)] * ctx.h[static_cast<std::size_t>(a * n + b)];
            for (std::size_t t = 0; t < closed.size(); ++t) closed[t] += hr[t] + 2 * kh[t];
            res = std::max(res, (forms::contract(f_r) - curvature::form11_from_matrix(closed, n)).max_abs());
            res = std::max(res, std::fabs(forms::contract_iterated(f_r, 2).at(0, 0) - 4 * ric_h));
          }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.second_order.contractions.analytic", "linearization",
      "contractions of the second-order operator match their closed forms (200 analytic triples)",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-9);
        Rng rng(cfg.seed, "linearization.second_order.contractions");
        const std::vector<MetricFamily> fams{
            fields::round_sphere_stereographic(3, 1.0), fields::round_sphere_stereographic(5, 1.0),
            fields::hyperbolic_ball(4, -1.0), fields::perturbed(fields::flat_torus(4), 0.2, cfg.seed),
            fields::round_sphere_angles(3, 1.0)};
        double res = 0;
        for (int i = 0; i < 200; ++i) {
          const auto& fam = fams[i % fams.size()];
          const int n = fam.n();
          const auto h = fields::random_sym_field(cfg.seed + 100 + i, n, 1, 0.7);
          const auto x = fam.chart().random_point(rng);
          const auto ctx = DeformationContext::build(fam, h, x);
          const auto d2 = linearization::d2_operator(ctx);
          const auto ric = curvature::matrix_from_form11(ctx.ricci);
          const auto rh = linearization::compose_sym(ric, ctx.h, n);
          const auto hr = linearization::compose_sym(ctx.h, ric, n);
          const auto kh = linearization::curvature_action(ctx.riemann, ctx.h, n);
          std::vector<double> closed(static_cast<std::size_t>(n) * n);
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
              const std::size_t t = static_cast<std::size_t>(a * n + b);
              closed[t] = -2 * ctx.bochner_h[t] + 2 * ctx.hess_tr_h[t] + 4 * ctx.delta_star_delta_h[t] -
                          (rh[t] + hr[t]) + 2 * kh[t];
            }
          res = std::max(res, (forms::contract(d2) - curvature::form11_from_matrix(closed, n)).max_abs());
          res = std::max(res,
                         std::fabs(forms::contract_iterated(d2, 2).at(0, 0) + 4 * ctx.lap_tr_h + 4 * ctx.delta_delta_h));
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.second_order.contractions.fd_jets", "linearization",
      "the same contractions through finite-difference jets of the deformation",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-6);
        Rng rng(cfg.seed, "linearization.second_order.contractions.fd");
        const auto fam = fields::round_sphere_stereographic(3, 1.0);
        double res = 0;
        for (int i = 0; i < 20; ++i) {
          const auto h = fields::fd_jet_field(fields::random_sym_field(cfg.seed + i, 3, 1, 0.5), 1e-4);
          const auto x = fam.chart().random_point(rng);
          const auto ctx = DeformationContext::build(fam, h, x);
          const auto d2 = linearization::d2_operator(ctx);
          const auto ric = curvature::matrix_from_form11(ctx.ricci);
          const auto rh = linearization::compose_sym(ric, ctx.h, 3);
          const auto hr = linearization::compose_sym(ctx.h, ric, 3);
          const auto kh = linearization::curvature_action(ctx.riemann, ctx.h, 3);
          std::vector<double> closed(9);
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              const std::size_t t = static_cast<std::size_t>(a * 3 + b);
              closed[t] = -2 * ctx.bochner_h[t] + 2 * ctx.hess_tr_h[t] + 4 * ctx.delta_star_delta_h[t] -
                          (rh[t] + hr[t]) + 2 * kh[t];
            }
          res = std::max(res, (forms::contract(d2) - curvature::form11_from_matrix(closed, 3)).max_abs());
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.riemann.scaling", "linearization",
      "scaling direction: the linearized curvature of h = g is the curvature itself",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-9);
        Rng rng(cfg.seed, "linearization.riemann.scaling");
        double res = 0;
        for (const auto& fam : {fields::round_sphere_stereographic(4, 1.0), fields::hyperbolic_ball(3, -1.0)}) {
          const auto x = fam.chart().random_point(rng);
          const auto ctx = DeformationContext::build(fam, fields::metric_as_field(fam), x);
          res = std::max(res, (linearization::linearized_riemann(ctx) - ctx.riemann).max_abs());
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.riemann.fd_oracle", "linearization",
      "linearized curvature equals the central-difference oracle with quadratic convergence",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-6);
        Rng rng(cfg.seed, "linearization.riemann.fd_oracle");
        const auto fam = config_space_form(cfg);
        const auto h = fields::random_sym_field(cfg.seed + 3, fam.n(), 1, 0.5);
        const auto x = fam.chart().random_point(rng);
        const auto ctx = DeformationContext::build(fam, h, x);
        const auto closed = linearization::linearized_riemann(ctx);
        std::vector<double> eps_steps{4 * cfg.eps, 2 * cfg.eps}, errs;
        for (const double e : eps_steps) {
          const auto fd = linearization::fd_linearize(fam, h, x, 1, e, linearization::LinearizedMap::riemann);
          // `derivative` is the e/2 difference; measure against the closed form.
          errs.push_back((closed - fd.derivative).max_abs());
        }
        rep.convergence_slope = linalg::loglog_slope(eps_steps, errs);
        rep.slope_low = 1.8;
        rep.slope_high = 2.2;
        const auto fd = linearization::fd_linearize(fam, h, x, 1, cfg.eps, linearization::LinearizedMap::riemann);
        rep.residual = (closed - fd.extrapolated).max_abs();
        rep.pass = rep.residual <= rep.tolerance && *rep.convergence_slope >= *rep.slope_low &&
                   *rep.convergence_slope <= *rep.slope_high;
        rep.params["n"] = fam.n();
      });

  add("linearization.riemann.contractions", "linearization",
      "closed forms of c Rdot and c^2 Rdot match direct contraction",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-9);
        Rng rng(cfg.seed, "linearization.riemann.contractions");
        double res = 0;
        const std::vector<MetricFamily> fams{fields::round_sphere_stereographic(4, 1.0),
                                             fields::perturbed(fields::flat_torus(4), 0.2, cfg.seed),
                                             fields::hyperbolic_ball(4, -0.7)};
        for (const auto& fam : fams) {
          const auto h = fields::random_sym_field(cfg.seed + 23, 4, 1, 0.6);
          const auto x = fam.chart().random_point(rng);
          const auto ctx = DeformationContext::build(fam, h, x);
          const auto rdot = linearization::linearized_riemann(ctx);
          res = std::max(res, (forms::contract(rdot) -
                               curvature::form11_from_matrix(linearization::contracted_linearized_riemann(ctx), 4))
                                  .max_abs());
          res = std::max(res, std::fabs(forms::contract_iterated(rdot, 2).at(0, 0) -
                                        linearization::twice_contracted_linearized_riemann(ctx)));
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.lovelock.conformal", "linearization",
      "conformal direction: Rdot^{(2k)}(g) = (1-k) lambda_k g and L(g) = -k lambda_k g",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-5);
        Rng rng(cfg.seed, "linearization.lovelock.conformal");
        const auto fam = config_space_form(cfg);
        const int n = fam.n(), k = cfg.k;
        const auto x = fam.chart().random_point(rng);
        const auto ctx = DeformationContext::build(fam, fields::metric_as_field(fam), x);
        const double lambda = curvature::space_form_lambda(n, k, fam.mu());
        const auto rdot2k = linearization::linearized_lovelock_ricci(ctx, k);
        const auto lg = linearization::stability_operator(ctx, k);
        double res = 0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double want_r = (i == j) ? (1 - k) * lambda : 0.0;
            const double want_l = (i == j) ? -k * lambda : 0.0;
            res = std::max(res, std::fabs(rdot2k[static_cast<std::size_t>(i * n + j)] - want_r) / std::fabs(lambda));
            res = std::max(res, std::fabs(lg[static_cast<std::size_t>(i * n + j)] - want_l) / std::fabs(lambda));
          }
        rep.params["n"] = n;
        rep.params["k"] = k;
        rep.params["mu"] = fam.mu();
        rep.params["eigenvalue"] = -k * lambda;
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.lovelock.fd_oracle", "linearization",
      "closed-form linearized 2k-Ricci equals the central-difference oracle on spheres",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-5);
        Rng rng(cfg.seed, "linearization.lovelock.fd_oracle");
        struct NK {
          int n, k;
        };
        double res = 0;
        double worst_slope = 2.0;
        for (const auto t : {NK{5, 2}, NK{6, 2}, NK{7, 2}, NK{7, 3}}) {
          const auto fam = fields::round_sphere_stereographic(t.n, 1.0);
          const auto h = fields::random_sym_field(cfg.seed + t.n * 10 + t.k, t.n, 1, 0.5);
          const auto x = fam.chart().random_point(rng);
          const auto ctx = DeformationContext::build(fam, h, x);
          const auto closed = linearization::linearized_lovelock_ricci(ctx, t.k);
          std::vector<double> eps_steps{8 * cfg.eps, 4 * cfg.eps}, errs;
          for (const double e : eps_steps) {
            const auto fd =
                linearization::fd_linearize(fam, h, x, t.k, e, linearization::LinearizedMap::lovelock_ricci);
            errs.push_back(matrix_max_abs(matrix_diff(closed, curvature::matrix_from_form11(fd.derivative))));
          }
          const double slope = linalg::loglog_slope(eps_steps, errs);
          if (std::fabs(slope - 2.0) > std::fabs(worst_slope - 2.0)) worst_slope = slope;
          const auto fd =
              linearization::fd_linearize(fam, h, x, t.k, cfg.eps, linearization::LinearizedMap::lovelock_ricci);
          res = std::max(res, matrix_max_abs(matrix_diff(closed, curvature::matrix_from_form11(fd.extrapolated))));
        }
        rep.convergence_slope = worst_slope;
        rep.slope_low = 1.8;
        rep.slope_high = 2.2;
        rep.residual = res;
        rep.pass = res <= rep.tolerance && worst_slope >= 1.8 && worst_slope <= 2.2;
      });

  add("linearization.lovelock.general_split", "linearization",
      "general-background split of the linearized 2k-Ricci equals the oracle on a perturbed torus",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-5);
        const auto fam = fields::perturbed(fields::flat_torus(5), 0.1, cfg.seed);
        const auto h = fields::random_sym_field(cfg.seed + 32, 5, 1, 0.5);
        Rng rng(cfg.seed, "linearization.lovelock.general_split");
        const auto x = fam.chart().random_point(rng);
        const auto ctx = DeformationContext::build(fam, h, x);
        const auto split = linearization::linearized_lovelock_ricci_split(ctx, 2);
        const auto fd =
            linearization::fd_linearize(fam, h, x, 2, cfg.eps, linearization::LinearizedMap::lovelock_ricci);
        rep.residual = matrix_max_abs(matrix_diff(split, curvature::matrix_from_form11(fd.extrapolated)));
        rep.pass = rep.residual <= rep.tolerance;
      });

  add("linearization.lovelock.lie_kernel", "linearization",
      "diffeomorphism directions lie in the kernel: L(delta* w) = 0",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-5);
        Rng rng(cfg.seed, "linearization.lovelock.lie_kernel");
        const auto fam = config_space_form(cfg);
        double res = 0;
        for (int i = 0; i < 5; ++i) {
          const auto omega = fields::random_one_form(cfg.seed + 17 + i, fam.n(), 1, 0.6);
          const auto h = geometry::lie_deformation_field(fam, omega);
          const auto x = fam.chart().random_point(rng);
          const auto ctx = DeformationContext::build(fam, h, x);
          res = std::max(res, matrix_max_abs(linearization::stability_operator(ctx, cfg.k)));
        }
        rep.params["n"] = fam.n();
        rep.params["k"] = cfg.k;
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.stability.two_routes", "linearization",
      "split-minus-lambda and expanded closed forms of L agree",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-7);
        Rng rng(cfg.seed, "linearization.stability.two_routes");
        double res = 0;
        struct NKM {
          int n, k;
          double mu;
        };
        for (const auto c : {NKM{5, 2, 1.0}, NKM{7, 3, 1.0}, NKM{5, 2, -1.0}, NKM{3, 1, 1.0}}) {
          const auto fam = c.mu > 0 ? fields::round_sphere_stereographic(c.n, c.mu)
                                    : fields::hyperbolic_ball(c.n, c.mu);
          const auto h = fields::random_sym_field(cfg.seed + 60 + c.n, c.n, 1, 0.5);
          const auto x = fam.chart().random_point(rng);
          const auto ctx = DeformationContext::build(fam, h, x);
          res = std::max(res, matrix_max_abs(matrix_diff(linearization::stability_operator(ctx, c.k),
                                                         linearization::stability_operator_expanded(ctx, c.k))));
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.stability.tracefree", "linearization",
      "trace-free restriction of L matches the full operator",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-8);
        Rng rng(cfg.seed, "linearization.stability.tracefree");
        const auto fam = fields::round_sphere_stereographic(5, 1.0);
        const auto h = fields::traceless_projection(fam, fields::random_sym_field(cfg.seed + 71, 5, 1, 0.6));
        const auto x = fam.chart().random_point(rng);
        const auto ctx = DeformationContext::build(fam, h, x);
        rep.residual = matrix_max_abs(matrix_diff(linearization::stability_operator(ctx, 2),
                                                  linearization::stability_operator_tracefree(ctx, 2)));
        rep.pass = rep.residual <= rep.tolerance;
      });

  add("linearization.stability.transverse_traceless", "linearization",
      "on transverse-traceless fields L reduces to (n-2k) C mu^{k-1} (1/2 nabla*nabla + mu)",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-7);
        Rng rng(cfg.seed, "linearization.stability.tt");
        double res = 0;
        {
          const auto fam = fields::round_sphere_angles(3, 1.0);
          const auto h = fields::s3_random_tt_field(fam, cfg.seed);
          const auto x = fam.chart().random_point(rng);
          const auto ctx = DeformationContext::build(fam, h, x);
          res = std::max(res, matrix_max_abs(matrix_diff(linearization::stability_operator(ctx, 1),
                                                         linearization::stability_operator_tt(ctx, 1, 1e-7))));
        }
        {
          const auto fam = fields::round_sphere_angles(5, 1.0);
          const auto h = fields::odd_sphere_reeb_tt_field(fam);
          const auto x = fam.chart().random_point(rng);
          const auto ctx = DeformationContext::build(fam, h, x);
          res = std::max(res, matrix_max_abs(matrix_diff(linearization::stability_operator(ctx, 2),
                                                         linearization::stability_operator_tt(ctx, 2, 1e-7))));
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.contraction_derivative", "linearization",
      "linearized contraction: (cdot h) g^2 = 2 (h - tr h g) and FD consistency",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-7);
        const auto fam = fields::round_sphere_stereographic(4, 1.0);
        const auto h = fields::random_sym_field(cfg.seed + 91, 4, 1, 0.5);
        Rng rng(cfg.seed, "linearization.contraction_derivative");
        const auto x = fam.chart().random_point(rng);
        const auto ctx = DeformationContext::build(fam, h, x);
        const int n = 4;
        const auto g = forms::metric_identity<double>(n);
        const auto g2 = forms::mul(g, g);
        auto expected = ctx.h_form() - g * ctx.tr_h;
        expected *= 2.0;
        double res = (linearization::cdot_apply(ctx.h, g2) - expected).max_abs();

        const auto gv = fam.gram(x);
        const auto hv = h.eval(x);
        const auto w_chart = forms::mul(curvature::form11_from_matrix(gv, n), curvature::form11_from_matrix(gv, n));
        const double t = 1e-6;
        auto contract_at = [&](double tt) {
          auto gt = gv;
          for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += tt * hv[i];
          return forms::contract_with_inverse(w_chart, linalg::inverse(gt, n));
        };
        auto fd = contract_at(t) - contract_at(-t);
        fd *= 1.0 / (2 * t);
        const auto frame = linalg::frame_from_gram(gv, n);
        res = std::max(res, (forms::transform(fd, frame) -
                             linearization::cdot_apply(ctx.h, forms::transform(w_chart, frame)))
                                .max_abs());
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.elliptic_replacement.routes", "linearization",
      "both displayed expressions for the elliptic replacement agree on trace-free fields",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-5);
        Rng rng(cfg.seed, "linearization.elliptic_replacement.routes");
        double res = 0;
        struct NK {
          int n, k;
        };
        for (const auto t : {NK{3, 1}, NK{5, 2}}) {
          const auto fam = fields::round_sphere_stereographic(t.n, 1.0);
          const auto h = fields::traceless_projection(fam, fields::random_sym_field(cfg.seed + 81, t.n, 1, 0.5));
          const auto x = fam.chart().random_point(rng);
          const auto ctx = DeformationContext::build(fam, h, x);
          res = std::max(res, matrix_max_abs(matrix_diff(linearization::elliptic_replacement(ctx, t.k),
                                                         linearization::elliptic_replacement_closed(ctx, t.k))));
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.elliptic_replacement.bianchi", "linearization",
      "Bianchi image of the elliptic replacement factors through the 1-form operator G (50 fields)",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-5);
        Rng rng(cfg.seed, "linearization.elliptic_replacement.bianchi");
        double res = 0;
        for (int i = 0; i < 50; ++i) {
          const bool small = i < 30;
          const int n = small ? 3 : 5;
          const int k = small ? 1 : 2;
          const auto fam = fields::round_sphere_stereographic(n, 1.0);
          const auto h = fields::traceless_projection(fam, fields::random_sym_field(cfg.seed + 200 + i, n, 1, 0.5));
          const auto x = fam.chart().random_point(rng);
          const auto ltilde_field = linearization::operator_chart_field(
              fam, h, [k](const DeformationContext& ctx) { return linearization::elliptic_replacement(ctx, k); });
          const auto lhs = curvature::bianchi_fd(fam, ltilde_field, x, k, cfg.fd_step);
          auto rhs = linearization::g_operator_fd(fam, linearization::divergence_field(fam, h), x, cfg.fd_step);
          const double coef =
              (n - 2 * k) * curvature::dimension_constant(n, k) * std::pow(fam.mu(), k - 1);
          for (auto& v : rhs) v *= coef;
          for (int j = 0; j < n; ++j)
            res = std::max(res, std::fabs(lhs[static_cast<std::size_t>(j)] - rhs[static_cast<std::size_t>(j)]));
        }
        rep.residual = res;
        rep.pass = res <= rep.tolerance;
      });

  add("linearization.bianchi.stability_kernel", "linearization",
      "the Bianchi operator annihilates the stability operator's output",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-5);
        const auto fam = fields::round_sphere_stereographic(5, 1.0);
        const auto h = fields::random_sym_field(cfg.seed + 64, 5, 1, 0.5);
        Rng rng(cfg.seed, "linearization.bianchi.stability_kernel");
        const auto x = fam.chart().random_point(rng);
        const int k = 2;
        const auto field = linearization::operator_chart_field(
            fam, h, [k](const DeformationContext& c) { return linearization::stability_operator(c, k); });
        rep.residual = curvature::one_form_norm(fam, x, curvature::bianchi_fd(fam, field, x, k, cfg.fd_step));
        rep.pass = rep.residual <= rep.tolerance;
      });

  add("linearization.bianchi.any_metric", "linearization",
      "the Bianchi operator annihilates the 2k-Ricci field of an arbitrary metric",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-6);
        const auto fam = fields::perturbed(fields::flat_torus(5), 0.08, cfg.seed);
        Rng rng(cfg.seed, "linearization.bianchi.any_metric");
        const auto x = fam.chart().random_point(rng);
        curvature::MatrixFieldFn ricci4 = [&fam](const std::vector<double>& p) {
          return curvature::matrix_from_form11(
              curvature::chart_lovelock_ricci(curvature::chart_curvature(fam, p), 2));
        };
        rep.residual = curvature::one_form_norm(fam, x, curvature::bianchi_fd(fam, ricci4, x, 2, 1e-3));
        rep.pass = rep.residual <= rep.tolerance;
      });

  add("linearization.adjoint.quadrature", "linearization",
      "divergence and symmetrized derivative are quadrature-adjoint on the 3-sphere",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-6);
        const auto fam = fields::round_sphere_angles(3, 1.0);
        const int polar = std::max(cfg.quad_nodes, 16);
        const auto quad = fields::SphereQuadrature::build(3, 1.0, polar, 2 * polar);
        const auto omega = fields::random_ambient_one_form(fam, cfg.seed + 3, 0.8);
        const auto h = fields::random_ambient_sphere_field(fam, cfg.seed + 4, 0.8);
        const auto dstar = geometry::lie_deformation_field(fam, omega);
        double lhs = 0, rhs = 0, scale = 0;
        for (const auto& node : quad.nodes()) {
          const int n = 3;
          const auto seeds = seed_point(node.x, 2);
          const auto m = geometry::MetricJets::at(fam, seeds);
          const auto hj = h.eval_jets(seeds);
          const auto wj = omega.eval_jets(seeds);
          const auto ds = dstar.eval_jets(seeds);
          const auto grad_h = geometry::covariant1_sym(hj, m.gamma, n);
          const auto dh = geometry::divergence_sym(grad_h, m.ginv, n);
          double a = 0, b = 0, s = 0;
          for (int i = 0; i < n; ++i)
            for (int al = 0; al < n; ++al) {
              b += m.ginv[static_cast<std::size_t>(i * n + al)].value() * wj[static_cast<std::size_t>(i)].value() *
                   dh[static_cast<std::size_t>(al)].value();
              s += m.ginv[static_cast<std::size_t>(i * n + al)].value() * wj[static_cast<std::size_t>(i)].value() *
                   wj[static_cast<std::size_t>(al)].value();
              for (int j = 0; j < n; ++j)
                for (int be = 0; be < n; ++be)
                  a += m.ginv[static_cast<std::size_t>(i * n + al)].value() *
                       m.ginv[static_cast<std::size_t>(j * n + be)].value() *
                       ds[static_cast<std::size_t>(i * n + j)].value() *
                       hj[static_cast<std::size_t>(al * n + be)].value();
            }
          lhs += node.weight * a;
          rhs += node.weight * b;
          scale += node.weight * s;
        }
        rep.residual = std::fabs(lhs - rhs) / std::max(scale, 1e-12);
        rep.pass = rep.residual <= rep.tolerance;
      });

  add("linearization.rayleigh.integration_by_parts", "linearization",
      "int <nabla*nabla h, h> = int |nabla h|^2 on the 3-sphere",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-4);
        const auto fam = fields::round_sphere_angles(3, 1.0);
        const auto quad = fields::SphereQuadrature::build(3, 1.0, cfg.quad_nodes, 2 * cfg.quad_nodes);
        const auto h = fields::traceless_projection(fam, fields::random_ambient_sphere_field(fam, cfg.seed + 22, 0.7));
        const auto r = linearization::rayleigh_quotient(fam, h, 1, quad);
        rep.residual = r.ibp_residual;
        rep.pass = rep.residual <= rep.tolerance;
        rep.params["n"] = 3;
        rep.params["k"] = 1;
      });

  add("linearization.rayleigh.bound", "linearization",
      "Rayleigh quotient of L on near-TT fields clears (n-2k) C mu^k minus the residual margin",
      [](const RunConfig& cfg, CheckReport& rep) {
        rep.tolerance = tol_or(cfg, 1e-9);
        const auto fam = fields::round_sphere_angles(3, 1.0);
        const auto quad = fields::SphereQuadrature::build(3, 1.0, cfg.quad_nodes, 2 * cfg.quad_nodes);
        double worst = 1e300;
        bool all_applicable = true;
        for (int i = 0; i < 3; ++i) {
          const auto h = fields::s3_random_tt_field(fam, cfg.seed + 21 + i);
          const auto r = linearization::rayleigh_quotient(fam, h, 1, quad);
          all_applicable &= r.bound_applicable;
          worst = std::min(worst, r.quotient - (r.bound - r.margin));
          rep.params["bound"] = r.bound;
        }
        rep.residual = worst >= 0 ? 0.0 : -worst;
        rep.pass = all_applicable && worst >= -rep.tolerance;
        rep.params["n"] = 3;
        rep.params["k"] = 1;
      });

  return defs;
}

inline std::vector<CheckReport> run_checks(const RunConfig& cfg) {
  auto defs = check_registry();
  std::vector<CheckDef> selected;
  for (auto& d : defs)
    if (cfg.suite == "all" || cfg.suite == d.suite) selected.push_back(std::move(d));
  if (selected.empty()) throw std::invalid_argument("unknown suite '" + cfg.suite + "'");
  std::sort(selected.begin(), selected.end(),
            [](const CheckDef& a, const CheckDef& b) { return a.id < b.id; });

  std::vector<CheckReport> reports(selected.size());
  std::vector<std::future<void>> futures;
  futures.reserve(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    futures.push_back(std::async(std::launch::async, [&cfg, &selected, &reports, i] {
      const auto t0 = std::chrono::steady_clock::now();
      CheckReport rep;
      rep.check_id = selected[i].id;
      rep.identity = selected[i].identity;
      detail::base_params(cfg, rep);
      try {
        selected[i].run(cfg, rep);
      } catch (const std::exception& e) {
        rep.pass = false;
        rep.residual = std::numeric_limits<double>::infinity();
        rep.identity += std::string(" [error: ") + e.what() + "]";
      }
      rep.wall_time_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      reports[i] = std::move(rep);
    }));
    // Bound concurrency to the hardware without an explicit pool.
    if (futures.size() >= std::max(2u, std::thread::hardware_concurrency())) {
      futures.front().get();
      futures.erase(futures.begin());
    }
  }
  for (auto& f : futures) f.get();
  return reports;
}

}  // namespace lovelock::cli
