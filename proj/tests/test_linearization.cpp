// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch.hpp>
#include <cmath>

#include "lovelock/linearization.hpp"

using namespace lovelock;
using namespace lovelock::fields;
using namespace lovelock::linearization;
using forms::DoubleForm;

namespace {

std::vector<double> matrix_residual(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

DeformationContext sphere_ctx(int n, double mu, std::uint64_t seed, int point_seed = 77) {
  const auto fam = round_sphere_stereographic(n, mu);
  const auto h = random_sym_field(seed, n, 1, 0.8);
  Rng rng(static_cast<std::uint64_t>(point_seed), "lin.point");
  const auto x = fam.chart().random_point(rng);
  return DeformationContext::build(fam, h, x);
}

}  // namespace

TEST_CASE("multiplication operator obeys the metric power rule") {
  // F_h(g^p) = 2p g^{p-1} h for p = 1, 2, 3.
  Rng rng(41, "lin.fmul");
  const int n = 5;
  const auto fam = round_sphere_stereographic(n, 1.0);
  const auto h = random_sym_field(5, n, 1, 0.8);
  const auto x = fam.chart().random_point(rng);
  const auto ctx = DeformationContext::build(fam, h, x);
  const auto g = forms::metric_identity<double>(n);
  const auto h_form = ctx.h_form();
  for (int p = 1; p <= 3; ++p) {
    const auto lhs = f_mul(ctx.h, forms::power(g, p));
    auto rhs = forms::mul(forms::power(g, p - 1), h_form);
    rhs *= 2.0 * p;
    CHECK((lhs - rhs).max_abs() < 1e-11);
  }
}

TEST_CASE("multiplication operator is linear in h, including degenerate spectra") {
  const int n = 4;
  // h1 with a repeated eigenvalue, h2 generic.
  std::vector<double> h1{2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 1, 0, 0, 0, 0, -3};
  std::vector<double> h2(16);
  Rng rng(42, "lin.fmul.linear");
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      const double v = rng.uniform(-1, 1);
      h2[static_cast<std::size_t>(i * 4 + j)] = v;
      h2[static_cast<std::size_t>(j * 4 + i)] = v;
    }
  DoubleForm<double> w(n, 2, 2);
  for (auto& c : w.components()) c = rng.uniform(-1, 1);
  w = forms::sym_project(w);
  auto sum = h1;
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += h2[i];
  const auto lhs = f_mul(sum, w);
  const auto rhs = f_mul(h1, w) + f_mul(h2, w);
  CHECK((lhs - rhs).max_abs() < 1e-11);
}

TEST_CASE("curvature multiplication on constant curvature: F_h(R) = 2 mu g h") {
  const auto ctx = sphere_ctx(4, 1.0, 9);
  const auto lhs = f_mul(ctx.h, ctx.riemann);
  auto rhs = forms::mul(forms::metric_identity<double>(4), ctx.h_form());
  rhs *= 2.0 * ctx.mu;
  CHECK((lhs - rhs).max_abs() < 1e-10);
}

TEST_CASE("contractions of the multiplication operator (general metric)") {
  // c F_h(R) = Ric o h + h o Ric + 2 K h ;  c^2 F_h(R) = 4 <Ric, h>.
  const auto fam = perturbed(flat_torus(4), 0.15, 3);
  const auto h = random_sym_field(11, 4, 1, 0.6);
  Rng rng(43, "lin.fmulc");
  const auto x = fam.chart().random_point(rng);
  const auto ctx = DeformationContext::build(fam, h, x);
  const int n = 4;

  const auto f_r = f_mul(ctx.h, ctx.riemann);
  const auto c1 = forms::contract(f_r);
  const auto ric = curvature::matrix_from_form11(ctx.ricci);
  auto closed = compose_sym(ric, ctx.h, n);
  const auto hr = compose_sym(ctx.h, ric, n);
  const auto kh = curvature_action(ctx.riemann, ctx.h, n);
  for (std::size_t i = 0; i < closed.size(); ++i) closed[i] += hr[i] + 2 * kh[i];
  CHECK((c1 - curvature::form11_from_matrix(closed, n)).max_abs() < 1e-10);

  double rdot_h = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rdot_h += ric[static_cast<std::size_t>(i * n + j)] * ctx.h[static_cast<std::size_t>(i * n + j)];
  CHECK(forms::contract(c1).at(0, 0) == Approx(4 * rdot_h).margin(1e-10));
}

TEST_CASE("curvature action and composition on space forms") {
  // K h = mu (tr h g - h),  Ric o h + h o Ric = 2 (n-1) mu h,  g o h = h.
  const auto ctx = sphere_ctx(3, 1.0, 21);
  const int n = 3;
  const auto kh = curvature_action(ctx.riemann, ctx.h, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double expected = ctx.mu * ((i == j ? ctx.tr_h : 0.0) - ctx.h[static_cast<std::size_t>(i * n + j)]);
      CHECK(kh[static_cast<std::size_t>(i * n + j)] == Approx(expected).margin(1e-10));
    }
  const auto ric = curvature::matrix_from_form11(ctx.ricci);
  auto sum = compose_sym(ric, ctx.h, n);
  const auto hr = compose_sym(ctx.h, ric, n);
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += hr[i];
  for (std::size_t i = 0; i < sum.size(); ++i)
    CHECK(sum[i] == Approx(2 * (n - 1) * ctx.mu * ctx.h[i]).margin(1e-9));

  std::vector<double> id(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) id[static_cast<std::size_t>(i * n + i)] = 1.0;
  CHECK(max_abs(matrix_residual(compose_sym(id, ctx.h, n), ctx.h)) == 0.0);
  CHECK(max_abs(matrix_residual(compose_sym(ctx.h, id, n), ctx.h)) == 0.0);
}

TEST_CASE("second-order operator annihilates the metric and is symmetric") {
  const auto fam = round_sphere_stereographic(4, 1.0);
  Rng rng(44, "lin.d2");
  const auto x = fam.chart().random_point(rng);
  const auto ctx = DeformationContext::build(fam, metric_as_field(fam), x);
  CHECK(d2_operator(ctx).max_abs() < 1e-10);
  CHECK(max_abs(ctx.grad_h) < 1e-11);  // metric is parallel

  const auto ctx2 = sphere_ctx(4, 1.0, 33);
  CHECK(forms::symmetry_residual(d2_operator(ctx2)) < 1e-11);
}

TEST_CASE("contractions of the second-order operator match their closed forms") {
  struct CaseDef {
    MetricFamily fam;
    std::uint64_t seed;
  };
  const std::vector<CaseDef> cases{{round_sphere_stereographic(3, 1.0), 4},
                                   {hyperbolic_ball(4, -1.0), 5},
                                   {perturbed(flat_torus(4), 0.2, 6), 6},
                                   {round_sphere_angles(3, 1.0), 7}};
  Rng rng(45, "lin.d2c");
  for (const auto& c : cases) {
    const int n = c.fam.n();
    const auto h = random_sym_field(c.seed, n, 1, 0.7);
    const auto x = c.fam.chart().random_point(rng);
    const auto ctx = DeformationContext::build(c.fam, h, x);
    const auto d2 = d2_operator(ctx);

    // First contraction.
    const auto ric = curvature::matrix_from_form11(ctx.ricci);
    const auto rh = compose_sym(ric, ctx.h, n);
    const auto hr = compose_sym(ctx.h, ric, n);
    const auto kh = curvature_action(ctx.riemann, ctx.h, n);
    std::vector<double> closed(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t t = static_cast<std::size_t>(i * n + j);
        closed[t] = -2 * ctx.bochner_h[t] + 2 * ctx.hess_tr_h[t] + 4 * ctx.delta_star_delta_h[t] -
                    (rh[t] + hr[t]) + 2 * kh[t];
      }
    CHECK((forms::contract(d2) - curvature::form11_from_matrix(closed, n)).max_abs() < 1e-9);

    // Second contraction.
    const double c2 = forms::contract_iterated(d2, 2).at(0, 0);
    CHECK(c2 == Approx(-4 * ctx.lap_tr_h - 4 * ctx.delta_delta_h).margin(1e-9));
  }
}

TEST_CASE("flat-background second contraction against raw partial derivatives") {
  // On the flat torus the closed form reduces to -4 Delta tr h - 4 delta delta h
  // with coordinate Laplacians; compute those directly from field jets.
  const auto fam = flat_torus(3);
  const auto h = random_sym_field(8, 3, 2, 0.5);
  Rng rng(46, "lin.flat");
  const auto x = fam.chart().random_point(rng);
  const auto ctx = DeformationContext::build(fam, h, x);

  const auto jets = h.eval_jets(seed_point(x, 2));
  double lap_tr = 0, deldel = 0;
  for (int a = 0; a < 3; ++a) {
    std::vector<int> alpha(3, 0);
    alpha[static_cast<std::size_t>(a)] = 2;
    for (int c = 0; c < 3; ++c) lap_tr -= jets[static_cast<std::size_t>(c * 3 + c)].partial(alpha);
    for (int b = 0; b < 3; ++b) {
      std::vector<int> beta(3, 0);
      beta[static_cast<std::size_t>(a)] += 1;
      beta[static_cast<std::size_t>(b)] += 1;
      deldel += jets[static_cast<std::size_t>(a * 3 + b)].partial(beta);
    }
  }
  const double c2 = forms::contract_iterated(d2_operator(ctx), 2).at(0, 0);
  CHECK(c2 == Approx(-4 * lap_tr - 4 * deldel).margin(1e-10));
}

TEST_CASE("linearized curvature: scaling direction reproduces the curvature") {
  // h = g: d/dt R_{(1+t)g} = R_g on any space form.
  for (const auto& fam : {round_sphere_stereographic(4, 1.0), hyperbolic_ball(3, -1.0)}) {
    Rng rng(47, "lin.rdotscale");
    const auto x = fam.chart().random_point(rng);
    const auto ctx = DeformationContext::build(fam, metric_as_field(fam), x);
    CHECK((linearized_riemann(ctx) - ctx.riemann).max_abs() < 1e-9);
  }
}

TEST_CASE("flat background: linearized curvature is the pure second-order term") {
  const auto fam = flat_torus(4);
  const auto h = random_sym_field(27, 4, 2, 0.6);
  Rng rng(58, "lin.rdotflat");
  const auto x = fam.chart().random_point(rng);
  const auto ctx = DeformationContext::build(fam, h, x);
  const auto expected = d2_operator(ctx) * (-0.25);
  CHECK((linearized_riemann(ctx) - expected).max_abs() < 1e-12);
  // The finite-difference map agrees: curvature of g + t h is O(t) here.
  const auto fd = fd_linearize(fam, h, x, 1, 1e-4, LinearizedMap::riemann);
  CHECK((fd.extrapolated - expected).max_abs() < 1e-8);
}

TEST_CASE("linearized curvature agrees with the finite-difference oracle") {
  struct CaseDef {
    MetricFamily fam;
    std::uint64_t seed;
  };
  const std::vector<CaseDef> cases{{round_sphere_stereographic(3, 1.0), 14},
                                   {perturbed(flat_torus(4), 0.1, 2), 15}};
  Rng rng(48, "lin.rdotfd");
  for (const auto& c : cases) {
    const auto h = random_sym_field(c.seed, c.fam.n(), 1, 0.5);
    const auto x = c.fam.chart().random_point(rng);
    const auto ctx = DeformationContext::build(c.fam, h, x);
    const auto closed = linearized_riemann(ctx);
    const auto fd = fd_linearize(c.fam, h, x, 1, 1e-4, LinearizedMap::riemann);
    CHECK((closed - fd.derivative).max_abs() < 5e-7);
    CHECK((closed - fd.extrapolated).max_abs() < 1e-8);
    CHECK(fd.richardson_error < 1e-7);
  }
}

TEST_CASE("contractions of the linearized curvature: closed forms vs direct contraction") {
  const std::vector<MetricFamily> fams{round_sphere_stereographic(4, 1.0),
                                       perturbed(flat_torus(4), 0.2, 19), hyperbolic_ball(4, -0.7)};
  Rng rng(49, "lin.crdot");
  for (const auto& fam : fams) {
    const auto h = random_sym_field(23, 4, 1, 0.6);
    const auto x = fam.chart().random_point(rng);
    const auto ctx = DeformationContext::build(fam, h, x);
    const auto rdot = linearized_riemann(ctx);
    const auto c_closed = contracted_linearized_riemann(ctx);
    CHECK((forms::contract(rdot) - curvature::form11_from_matrix(c_closed, 4)).max_abs() < 1e-9);
    CHECK(forms::contract_iterated(rdot, 2).at(0, 0) ==
          Approx(twice_contracted_linearized_riemann(ctx)).margin(1e-9));

    // Parallel direction: c^2 Rdot(g) = <Ric, g> = scalar curvature.
    const auto ctx_g = DeformationContext::build(fam, metric_as_field(fam), x);
    CHECK(twice_contracted_linearized_riemann(ctx_g) == Approx(ctx_g.scalar).margin(1e-9));
  }
}

TEST_CASE("linearized 2k-Ricci: conformal direction and FD oracle on the 5-sphere") {
  const auto fam = round_sphere_stereographic(5, 1.0);
  Rng rng(50, "lin.rdot2k");
  const auto x = fam.chart().random_point(rng);
  const int k = 2;

  // h = g: the scaling oracle gives (1-k) lambda_k g = -144 g.
  const auto ctx_g = DeformationContext::build(fam, metric_as_field(fam), x);
  const auto conf = linearized_lovelock_ricci(ctx_g, k);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(conf[static_cast<std::size_t>(i * 5 + j)] == Approx(i == j ? -144.0 : 0.0).margin(1e-7));

  // Random direction: closed split equals the FD oracle.
  const auto h = random_sym_field(31, 5, 1, 0.5);
  const auto ctx = DeformationContext::build(fam, h, x);
  const auto closed = linearized_lovelock_ricci(ctx, k);
  const auto fd = fd_linearize(fam, h, x, k, 1e-4, LinearizedMap::lovelock_ricci);
  const auto fd_mat = curvature::matrix_from_form11(fd.extrapolated);
  CHECK(max_abs(matrix_residual(closed, fd_mat)) < 1e-6);

  // The general split route agrees as well.
  const auto split = linearized_lovelock_ricci_split(ctx, k);
  CHECK(max_abs(matrix_residual(closed, split)) < 1e-8);
}

TEST_CASE("general-background split equals the FD oracle on a perturbed torus") {
  const auto fam = perturbed(flat_torus(5), 0.1, 8);
  const auto h = random_sym_field(32, 5, 1, 0.5);
  Rng rng(51, "lin.split");
  const auto x = fam.chart().random_point(rng);
  const auto ctx = DeformationContext::build(fam, h, x);
  const auto split = linearized_lovelock_ricci_split(ctx, 2);
  const auto fd = fd_linearize(fam, h, x, 2, 1e-4, LinearizedMap::lovelock_ricci);
  CHECK(max_abs(matrix_residual(split, curvature::matrix_from_form11(fd.extrapolated))) < 1e-6);
}

TEST_CASE("stability operator: conformal eigenvalue, two routes, sign dichotomy") {
  Rng rng(52, "lin.L");
  struct CaseDef {
    int n, k;
    double mu;
  };
  for (const auto c : {CaseDef{5, 2, 1.0}, CaseDef{7, 3, 1.0}, CaseDef{5, 2, -1.0}, CaseDef{3, 1, 1.0}}) {
    const auto fam = c.mu > 0 ? round_sphere_stereographic(c.n, c.mu) : hyperbolic_ball(c.n, c.mu);
    const auto x = fam.chart().random_point(rng);

    // L(g) = -k lambda_k g.
    const auto ctx_g = DeformationContext::build(fam, metric_as_field(fam), x);
    const auto lg = stability_operator(ctx_g, c.k);
    const double expected = -c.k * curvature::space_form_lambda(c.n, c.k, c.mu);
    for (int i = 0; i < c.n; ++i)
      CHECK(lg[static_cast<std::size_t>(i * c.n + i)] == Approx(expected).epsilon(1e-8));

    // Route agreement on random h.
    const auto h = random_sym_field(60 + c.n, c.n, 1, 0.5);
    const auto ctx = DeformationContext::build(fam, h, x);
    const auto r1 = stability_operator(ctx, c.k);
    const auto r2 = stability_operator_expanded(ctx, c.k);
    CHECK(max_abs(matrix_residual(r1, r2)) < 1e-7);

    // The leading coefficient (n-2k) C mu^{k-1} never vanishes for mu != 0.
    CHECK(std::fabs((c.n - 2 * c.k) * curvature::dimension_constant(c.n, c.k) * std::pow(c.mu, c.k - 1)) > 0);
  }
}

TEST_CASE("stability operator annihilates diffeomorphism directions") {
  const auto fam = round_sphere_stereographic(5, 1.0);
  const auto omega = random_one_form(17, 5, 1, 0.6);
  const auto h = geometry::lie_deformation_field(fam, omega);
  Rng rng(53, "lin.lie");
  const auto x = fam.chart().random_point(rng);
  const auto ctx = DeformationContext::build(fam, h, x);
  const auto lh = stability_operator(ctx, 2);
  CHECK(max_abs(lh) < 1e-8);

  // The finite-difference oracle also copes with directions that spend
  // derivative orders internally.
  const auto fd = fd_linearize(fam, h, x, 2, 1e-4, LinearizedMap::lovelock_ricci);
  const auto closed = linearized_lovelock_ricci(ctx, 2);
  CHECK(max_abs(matrix_residual(closed, curvature::matrix_from_form11(fd.extrapolated))) < 1e-6);
}

TEST_CASE("restricted stability operators match the full one on their domains") {
  Rng rng(54, "lin.Lrestrict");
  // Trace-free restriction on the 5-sphere, k = 2.
  {
    const auto fam = round_sphere_stereographic(5, 1.0);
    const auto h = traceless_projection(fam, random_sym_field(71, 5, 1, 0.6));
    const auto x = fam.chart().random_point(rng);
    const auto ctx = DeformationContext::build(fam, h, x);
    CHECK(measure_restriction(ctx).trace_residual < 1e-12);
    const auto full = stability_operator(ctx, 2);
    const auto restricted = stability_operator_tracefree(ctx, 2);
    CHECK(max_abs(matrix_residual(full, restricted)) < 1e-8);
    // TT variant must reject this h (divergence residual is order one).
    CHECK_THROWS_AS(stability_operator_tt(ctx, 2), std::domain_error);
  }
  // Transverse-traceless restriction: invariant frame field on the 3-sphere.
  {
    const auto fam = round_sphere_angles(3, 1.0);
    const auto h = s3_random_tt_field(fam, 5);
    const auto x = fam.chart().random_point(rng);
    const auto ctx = DeformationContext::build(fam, h, x);
    const auto viol = measure_restriction(ctx);
    CHECK(viol.trace_residual < 1e-10);
    CHECK(viol.divergence_residual < 1e-9);
    const auto full = stability_operator(ctx, 1);
    const auto tt = stability_operator_tt(ctx, 1, 1e-7);
    CHECK(max_abs(matrix_residual(full, tt)) < 1e-8);
  }
  // Reeb-based field on the 5-sphere, k = 2.
  {
    const auto fam = round_sphere_angles(5, 1.0);
    const auto h = odd_sphere_reeb_tt_field(fam);
    const auto x = fam.chart().random_point(rng);
    const auto ctx = DeformationContext::build(fam, h, x);
    const auto viol = measure_restriction(ctx);
    CHECK(viol.trace_residual < 1e-10);
    CHECK(viol.divergence_residual < 1e-9);
    const auto full = stability_operator(ctx, 2);
    const auto tt = stability_operator_tt(ctx, 2, 1e-7);
    CHECK(max_abs(matrix_residual(full, tt)) < 1e-7);
  }
}

TEST_CASE("elliptic replacement: both displayed routes coincide on trace-free fields") {
  Rng rng(55, "lin.Ltilde");
  struct CaseDef {
    MetricFamily fam;
    int k;
  };
  const std::vector<CaseDef> cases{{round_sphere_stereographic(3, 1.0), 1},
                                   {round_sphere_stereographic(5, 1.0), 2}};
  for (const auto& c : cases) {
    const auto h = traceless_projection(c.fam, random_sym_field(81, c.fam.n(), 1, 0.5));
    const auto x = c.fam.chart().random_point(rng);
    const auto ctx = DeformationContext::build(c.fam, h, x);
    const auto r1 = elliptic_replacement(ctx, c.k);
    const auto r2 = elliptic_replacement_closed(ctx, c.k);
    CHECK(max_abs(matrix_residual(r1, r2)) < 1e-8);
  }
}

TEST_CASE("linearized contraction: metric-square rule and FD consistency") {
  const auto fam = round_sphere_stereographic(4, 1.0);
  const auto h = random_sym_field(91, 4, 1, 0.5);
  Rng rng(56, "lin.cdot");
  const auto x = fam.chart().random_point(rng);
  const auto ctx = DeformationContext::build(fam, h, x);
  const int n = 4;
  const auto g = forms::metric_identity<double>(n);
  const auto g2 = forms::mul(g, g);

  // (cdot h) g^2 = 2 (h - tr h g).
  const auto lhs = cdot_apply(ctx.h, g2);
  auto expected = ctx.h_form() - g * ctx.tr_h;
  expected *= 2.0;
  CHECK((lhs - expected).max_abs() < 1e-12);

  // h = g: 2 (1 - n) g.
  std::vector<double> id(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) id[static_cast<std::size_t>(i * n + i)] = 1.0;
  const auto lg = cdot_apply(id, g2);
  CHECK((lg - g * (2.0 * (1 - n))).max_abs() < 1e-12);

  // Scalars are annihilated.
  const auto s = DoubleForm<double>::scalar(n, 3.0);
  CHECK(cdot_apply(ctx.h, s).is_zero());

  // Finite-difference consistency in chart components.
  const auto gv = fam.gram(x);
  const auto hv = h.eval(x);
  const auto g_chart = curvature::form11_from_matrix(gv, n);
  const auto w_chart = forms::mul(g_chart, g_chart);
  const double t = 1e-6;
  auto contract_at = [&](double tt) {
    auto gt = gv;
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += tt * hv[i];
    return forms::contract_with_inverse(w_chart, linalg::inverse(gt, n));
  };
  auto fd = contract_at(t) - contract_at(-t);
  fd *= 1.0 / (2 * t);
  const auto frame = linalg::frame_from_gram(gv, n);
  const auto fd_on = forms::transform(fd, frame);
  const auto exact_on = cdot_apply(ctx.h, forms::transform(w_chart, frame));
  CHECK((fd_on - exact_on).max_abs() < 1e-7);
}

TEST_CASE("finite-difference jets reproduce the closed forms at reduced accuracy") {
  // The identities hold through the finite-difference jet route as well; this
  // exercises the user-supplied-evaluator path end to end.
  const auto fam = round_sphere_stereographic(3, 1.0);
  const auto h = fd_jet_field(random_sym_field(12, 3, 1, 0.5), 1e-4);
  Rng rng(57, "lin.fdjets");
  const auto x = fam.chart().random_point(rng);
  const auto ctx = DeformationContext::build(fam, h, x);
  const auto d2 = d2_operator(ctx);
  const auto ric = curvature::matrix_from_form11(ctx.ricci);
  const auto rh = compose_sym(ric, ctx.h, 3);
  const auto hr = compose_sym(ctx.h, ric, 3);
  const auto kh = curvature_action(ctx.riemann, ctx.h, 3);
  std::vector<double> closed(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const std::size_t t = static_cast<std::size_t>(i * 3 + j);
      closed[t] = -2 * ctx.bochner_h[t] + 2 * ctx.hess_tr_h[t] + 4 * ctx.delta_star_delta_h[t] -
                  (rh[t] + hr[t]) + 2 * kh[t];
    }
  CHECK((forms::contract(d2) - curvature::form11_from_matrix(closed, 3)).max_abs() < 1e-6);
}
