// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch.hpp>
#include <cmath>

#include "lovelock/linearization.hpp"

using namespace lovelock;
using namespace lovelock::fields;
using namespace lovelock::linearization;

TEST_CASE("bianchi operator annihilates the metric") {
  const auto fam = perturbed(flat_torus(4), 0.15, 13);
  Rng rng(61, "linf.bianchi_g");
  const auto x = fam.chart().random_point(rng);
  curvature::MatrixFieldFn gf = [&fam](const std::vector<double>& p) { return fam.gram(p); };
  const auto beta = curvature::bianchi_fd(fam, gf, x, 2, 1e-4);
  for (double v : beta) CHECK(std::fabs(v) < 1e-8);
}

TEST_CASE("bianchi operator annihilates the stability operator output") {
  const auto fam = round_sphere_stereographic(5, 1.0);
  const auto h = random_sym_field(64, 5, 1, 0.5);
  Rng rng(62, "linf.bianchi_L");
  const auto x = fam.chart().random_point(rng);
  const int k = 2;
  const auto field = operator_chart_field(
      fam, h, [k](const DeformationContext& c) { return stability_operator(c, k); });
  const auto beta = curvature::bianchi_fd(fam, field, x, k, 1e-4);
  CHECK(curvature::one_form_norm(fam, x, beta) < 1e-5);
}

TEST_CASE("bianchi operator annihilates the Lovelock tensor of a generic metric") {
  // The defect of an arbitrary (non-Einstein) metric has vanishing Bianchi
  // image; any constant multiple of g drops out of the operator, so this is
  // checked on the 2k-Ricci field itself.
  const auto fam = perturbed(flat_torus(5), 0.08, 10);
  Rng rng(63, "linf.bianchi_G");
  const auto x = fam.chart().random_point(rng);
  curvature::MatrixFieldFn ricci4 = [&fam](const std::vector<double>& p) {
    const auto chart = curvature::chart_curvature(fam, p);
    return curvature::matrix_from_form11(curvature::chart_lovelock_ricci(chart, 2));
  };
  const auto beta = curvature::bianchi_fd(fam, ricci4, x, 2, 1e-3);
  CHECK(curvature::one_form_norm(fam, x, beta) < 1e-6);
}

TEST_CASE("bianchi of the elliptic replacement factors through the 1-form operator") {
  struct CaseDef {
    MetricFamily fam;
    int k;
    std::uint64_t seed;
  };
  const std::vector<CaseDef> cases{{round_sphere_stereographic(3, 1.0), 1, 5},
                                   {round_sphere_stereographic(5, 1.0), 2, 6}};
  Rng rng(64, "linf.pup");
  for (const auto& c : cases) {
    const int n = c.fam.n();
    const int k = c.k;
    const auto h = traceless_projection(c.fam, random_sym_field(c.seed, n, 1, 0.5));
    const auto x = c.fam.chart().random_point(rng);

    const auto ltilde_field = operator_chart_field(
        c.fam, h, [k](const DeformationContext& ctx) { return elliptic_replacement(ctx, k); });
    const auto lhs = curvature::bianchi_fd(c.fam, ltilde_field, x, k, 1e-4);

    const auto delta_h = divergence_field(c.fam, h);
    auto rhs = g_operator_fd(c.fam, delta_h, x, 1e-4);
    const double coef =
        (n - 2 * k) * curvature::dimension_constant(n, k) * std::pow(c.fam.mu(), k - 1);
    for (auto& v : rhs) v *= coef;

    double resid = 0;
    for (int i = 0; i < n; ++i) resid = std::max(resid, std::fabs(lhs[static_cast<std::size_t>(i)] - rhs[static_cast<std::size_t>(i)]));
    CHECK(resid < 1e-5);
  }
}

TEST_CASE("divergence-free directions kill both sides of the factorization") {
  const auto fam = round_sphere_angles(3, 1.0);
  const auto h = s3_random_tt_field(fam, 9);
  Rng rng(65, "linf.pup_tt");
  const auto x = fam.chart().random_point(rng);
  const int k = 1;

  const auto ltilde_field = operator_chart_field(
      fam, h, [k](const DeformationContext& ctx) { return elliptic_replacement(ctx, k, 1e-6); });
  const auto lhs = curvature::bianchi_fd(fam, ltilde_field, x, k, 1e-4);
  CHECK(curvature::one_form_norm(fam, x, lhs) < 1e-5);

  const auto delta_h = divergence_field(fam, h);
  const auto rhs = g_operator_fd(fam, delta_h, x, 1e-4);
  for (double v : rhs) CHECK(std::fabs(v) < 1e-5);
}

TEST_CASE("quadrature adjointness of divergence and its formal adjoint") {
  // int <delta* w, h> = int <w, delta h> over the 3-sphere.
  const auto fam = round_sphere_angles(3, 1.0);
  const auto quad = SphereQuadrature::build(3, 1.0, 10, 20);
  const auto omega = random_ambient_one_form(fam, 3, 0.8);
  const auto h = random_ambient_sphere_field(fam, 4, 0.8);
  const auto dstar = geometry::lie_deformation_field(fam, omega);

  double lhs = 0, rhs = 0;
  for (const auto& node : quad.nodes()) {
    const int n = 3;
    const auto seeds = seed_point(node.x, 2);
    const auto m = geometry::MetricJets::at(fam, seeds);
    const auto hj = h.eval_jets(seeds);
    const auto wj = omega.eval_jets(seeds);
    const auto ds = dstar.eval_jets(seeds);
    const auto grad_h = geometry::covariant1_sym(hj, m.gamma, n);
    const auto dh = geometry::divergence_sym(grad_h, m.ginv, n);
    // <delta* w, h> = g^{ia} g^{jb} (delta* w)_{ij} h_{ab}; likewise for 1-forms.
    double a = 0, b = 0;
    for (int i = 0; i < n; ++i)
      for (int alpha = 0; alpha < n; ++alpha) {
        b += m.ginv[static_cast<std::size_t>(i * n + alpha)].value() * wj[static_cast<std::size_t>(i)].value() *
             dh[static_cast<std::size_t>(alpha)].value();
        for (int j = 0; j < n; ++j)
          for (int beta = 0; beta < n; ++beta)
            a += m.ginv[static_cast<std::size_t>(i * n + alpha)].value() *
                 m.ginv[static_cast<std::size_t>(j * n + beta)].value() *
                 ds[static_cast<std::size_t>(i * n + j)].value() *
                 hj[static_cast<std::size_t>(alpha * n + beta)].value();
      }
    lhs += node.weight * a;
    rhs += node.weight * b;
  }
  CHECK(lhs == Approx(rhs).epsilon(1e-6));
}

TEST_CASE("rayleigh quotient on the 3-sphere") {
  const auto fam = round_sphere_angles(3, 1.0);
  const auto quad = SphereQuadrature::build(3, 1.0, 10, 20);

  // Exact transverse-traceless input: bound asserted.
  const auto tt = s3_random_tt_field(fam, 21);
  const auto rep = rayleigh_quotient(fam, tt, 1, quad);
  CHECK(rep.bound == Approx(1.0));
  CHECK(rep.ibp_residual < 1e-4);
  CHECK(rep.trace_residual < 1e-3);
  CHECK(rep.divergence_residual < 1e-3);
  CHECK(rep.bound_applicable);
  CHECK(rep.bound_satisfied);
  CHECK(rep.quotient >= rep.bound - rep.margin - 1e-9);

  // The integration-by-parts identity holds for any global smooth field.
  const auto smooth = traceless_projection(fam, random_ambient_sphere_field(fam, 22, 0.7));
  const auto rep2 = rayleigh_quotient(fam, smooth, 1, quad);
  CHECK(rep2.ibp_residual < 1e-4);
  // Residual-aware bound still holds (margin accounts for the divergence).
  CHECK(rep2.quotient >= rep2.bound - rep2.margin - 1e-9);

  // The zero field is rejected.
  const auto zero = random_sym_field(1, 3, 1, 0.0);
  CHECK_THROWS_AS(rayleigh_quotient(fam, zero, 1, quad), std::domain_error);
}
