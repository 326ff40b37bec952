// SPDX-License-Identifier: Apache-2.0
//
// Verification front end: runs the identity suites against seeded random
// inputs, prints invariant tables for chosen backgrounds, cross-checks the
// closed-form linearizations against finite-difference oracles, and evaluates
// the Rayleigh-quotient bound on the 3-sphere. Reports are JSON
// ("lovelock-report/1") or a plain table.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "lovelock/checks.hpp"

using namespace lovelock;
using cli::CheckReport;
using cli::RunConfig;

namespace {

struct FlagSet {
  std::string suite, family, format, out, config, direction;
  int n = 0, k = 0, quad_nodes = 0;
  double mu = 0, eps = 0, fd_step = 0, tol = 0;
  std::uint64_t seed = 0;
};

void register_common(CLI::App* cmd, FlagSet& f) {
  cmd->add_option("--family", f.family, "background family: sphere | sphere_angles | hyperbolic | torus | perturbed_torus | product");
  cmd->add_option("--n", f.n, "ambient dimension");
  cmd->add_option("--k", f.k, "curvature order (the 2k in 2k-Einstein)");
  cmd->add_option("--mu", f.mu, "sectional curvature of space-form backgrounds");
  cmd->add_option("--eps", f.eps, "linearization direction step");
  cmd->add_option("--fd-step", f.fd_step, "chart stencil step for field derivatives");
  cmd->add_option("--seed", f.seed, "master seed; every check derives a named substream");
  cmd->add_option("--quad-nodes", f.quad_nodes, "polar quadrature nodes per axis (azimuth uses twice as many)");
  cmd->add_option("--tol", f.tol, "override the per-check tolerances");
  cmd->add_option("--format", f.format, "output format: json | table");
  cmd->add_option("--out", f.out, "write the report to this path instead of stdout");
  cmd->add_option("--config", f.config, "key=value config file ('#' comments); flags override it");
}

RunConfig assemble(const CLI::App* cmd, const FlagSet& f, const std::string& default_format) {
  RunConfig cfg;
  cfg.format = default_format;
  if (cmd->count("--config")) cfg.apply_file(f.config);
  if (cmd->count("--family")) cfg.family = f.family;
  if (cmd->count("--n")) cfg.n = f.n;
  if (cmd->count("--k")) cfg.k = f.k;
  if (cmd->count("--mu")) cfg.mu = f.mu;
  if (cmd->count("--eps")) cfg.eps = f.eps;
  if (cmd->count("--fd-step")) cfg.fd_step = f.fd_step;
  if (cmd->count("--seed")) cfg.seed = f.seed;
  if (cmd->count("--quad-nodes")) cfg.quad_nodes = f.quad_nodes;
  if (cmd->count("--tol")) cfg.tol = f.tol;
  if (cmd->count("--format")) cfg.format = f.format;
  if (cmd->count("--out")) cfg.out = f.out;
  if (cfg.format != "json" && cfg.format != "table")
    throw std::invalid_argument("format must be 'json' or 'table'");
  return cfg;
}

void emit(const RunConfig& cfg, const std::vector<CheckReport>& reports) {
  std::string text = cfg.format == "json" ? cli::report_envelope(reports).dump(2) + "\n"
                                          : cli::render_table(reports);
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(cfg.out);
    if (!out) throw std::invalid_argument("cannot open output file '" + cfg.out + "'");
    out << text;
  }
}

int exit_code(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return 1;
  return 0;
}

int cmd_verify(const CLI::App* cmd, const FlagSet& f) {
  RunConfig cfg = assemble(cmd, f, "json");
  if (cmd->count("--suite")) cfg.suite = f.suite;
  const auto reports = cli::run_checks(cfg);
  emit(cfg, reports);
  return exit_code(reports);
}

int cmd_invariants(const CLI::App* cmd, const FlagSet& f) {
  RunConfig cfg = assemble(cmd, f, "table");
  if (2 * cfg.k > cfg.n && cfg.family != "product")
    throw std::invalid_argument("invariants: 2k exceeds the dimension for a non-product family");
  const auto fam = cli::detail::config_family(cfg);
  Rng rng(cfg.seed, "cli.invariants.points");

  nlohmann::json j;
  j["schema"] = "lovelock-report/1";
  j["family"] = fam.name();
  j["n"] = cfg.n;
  j["k"] = cfg.k;
  j["mu"] = cfg.mu;
  const bool closed_forms = fam.is_space_form() && fam.n() >= 3 && 2 * cfg.k <= fam.n();
  if (closed_forms) {
    j["dimension_constant"] = curvature::dimension_constant(fam.n(), cfg.k);
    j["lambda_closed_form"] = curvature::space_form_lambda(fam.n(), cfg.k, fam.mu());
  }
  double max_defect = 0, max_trace_resid = 0;
  nlohmann::json points = nlohmann::json::array();
  for (int i = 0; i < 5; ++i) {
    const auto x = fam.chart().random_point(rng);
    const auto pack = curvature::curvature_at(fam, x, cfg.k);
    const auto p = cli::curvature_pack_json(pack);
    points.push_back(p);
    max_defect = std::max(max_defect, p["defect_norm"].get<double>());
    max_trace_resid = std::max(max_trace_resid, std::fabs(pack.trace_identity_residual));
  }
  j["points"] = points;
  j["max_defect_norm"] = max_defect;
  j["max_trace_identity_residual"] = max_trace_resid;

  std::string text;
  if (cfg.format == "json") {
    text = j.dump(2) + "\n";
  } else {
    std::ostringstream os;
    os << "family: " << fam.name() << "  n=" << fam.n() << "  k=" << cfg.k << "\n";
    if (closed_forms) {
      os << "C_{n,k}        = " << j["dimension_constant"].get<double>() << "\n";
      os << "lambda_k       = " << j["lambda_closed_form"].get<double>() << "\n";
    }
    os << "S^(2k) (pt 0)  = " << points[0]["lovelock_scalar"].get<double>() << "\n";
    os << "lambda (pt 0)  = " << points[0]["lambda"].get<double>() << "\n";
    os << "scalar (pt 0)  = " << points[0]["scalar_curvature"].get<double>() << "\n";
    os << "max defect     = " << max_defect << "\n";
    os << "max tr residual= " << max_trace_resid << "\n";
    text = os.str();
  }
  if (cfg.out.empty())
    std::cout << text;
  else {
    std::ofstream out(cfg.out);
    if (!out) throw std::invalid_argument("cannot open output file '" + cfg.out + "'");
    out << text;
  }
  return 0;
}

int cmd_linearize(const CLI::App* cmd, const FlagSet& f) {
  RunConfig cfg = assemble(cmd, f, "json");
  std::string direction = cmd->count("--direction") ? f.direction : "random";
  const auto fam = cli::detail::config_space_form(cfg);
  if (!fam.is_space_form() || fam.mu() == 0.0)
    throw std::invalid_argument("linearize: closed forms need a constant-curvature family");
  if (2 * cfg.k >= fam.n()) throw std::invalid_argument("linearize: need 2k < n");

  Rng rng(cfg.seed, "cli.linearize.point");
  const auto x = fam.chart().random_point(rng);
  fields::SymTensorField h;
  if (direction == "random")
    h = fields::random_sym_field(cfg.seed + 1, fam.n(), 1, 0.5);
  else if (direction == "conformal")
    h = fields::metric_as_field(fam);
  else if (direction == "lie")
    h = geometry::lie_deformation_field(fam, fields::random_one_form(cfg.seed + 2, fam.n(), 1, 0.6));
  else
    throw std::invalid_argument("linearize: direction must be random | conformal | lie");

  const auto ctx = linearization::DeformationContext::build(fam, h, x);
  const auto closed = linearization::stability_operator(ctx, cfg.k);
  const double lambda = curvature::space_form_lambda(fam.n(), cfg.k, fam.mu());

  // Closed form vs finite-difference oracle, with a convergence fit.
  const auto closed_r2k = linearization::linearized_lovelock_ricci(ctx, cfg.k);
  std::vector<double> eps_steps{4 * cfg.eps, 2 * cfg.eps}, errs;
  for (const double e : eps_steps) {
    const auto fd = linearization::fd_linearize(fam, h, x, cfg.k, e, linearization::LinearizedMap::lovelock_ricci);
    const auto fd_mat = curvature::matrix_from_form11(fd.derivative);
    double err = 0;
    for (std::size_t t = 0; t < fd_mat.size(); ++t) err = std::max(err, std::fabs(closed_r2k[t] - fd_mat[t]));
    errs.push_back(err);
  }
  const auto fd = linearization::fd_linearize(fam, h, x, cfg.k, cfg.eps, linearization::LinearizedMap::lovelock_ricci);
  const auto fd_mat = curvature::matrix_from_form11(fd.extrapolated);
  double fd_residual = 0;
  for (std::size_t t = 0; t < fd_mat.size(); ++t) fd_residual = std::max(fd_residual, std::fabs(closed_r2k[t] - fd_mat[t]));

  nlohmann::json j;
  j["schema"] = "lovelock-report/1";
  j["family"] = fam.name();
  j["n"] = fam.n();
  j["k"] = cfg.k;
  j["mu"] = fam.mu();
  j["direction"] = direction;
  j["eps"] = cfg.eps;
  j["fd_vs_closed_residual"] = fd_residual;
  j["richardson_error"] = fd.richardson_error;
  j["convergence_slope"] = linalg::loglog_slope(eps_steps, errs);
  if (direction == "conformal") {
    double eig = 0;
    for (int i = 0; i < fam.n(); ++i) eig += closed[static_cast<std::size_t>(i * fam.n() + i)];
    eig /= fam.n();
    j["eigenvalue"] = eig;
    j["eigenvalue_expected"] = -cfg.k * lambda;
  }
  if (direction == "lie") {
    double res = 0;
    for (double v : closed) res = std::max(res, std::fabs(v));
    j["kernel_residual"] = res;
  }
  const std::string text = cfg.format == "table" ? j.dump(2) + "\n" : j.dump(2) + "\n";
  if (cfg.out.empty())
    std::cout << text;
  else {
    std::ofstream out(cfg.out);
    out << text;
  }
  return 0;
}

int cmd_rayleigh(const CLI::App* cmd, const FlagSet& f) {
  RunConfig cfg = assemble(cmd, f, "json");
  if (cmd->count("--n") == 0) cfg.n = 3;
  if (cmd->count("--k") == 0) cfg.k = 1;
  if (cfg.n != 3) throw std::invalid_argument("rayleigh: quadrature is available for n = 3 only");
  if (2 * cfg.k >= cfg.n) throw std::invalid_argument("rayleigh: need 2k < n");
  const auto fam = fields::round_sphere_angles(3, 1.0);
  const auto quad = fields::SphereQuadrature::build(3, 1.0, cfg.quad_nodes, 2 * cfg.quad_nodes);
  const auto h = fields::s3_random_tt_field(fam, cfg.seed);
  const auto r = linearization::rayleigh_quotient(fam, h, cfg.k, quad);

  nlohmann::json j;
  j["schema"] = "lovelock-report/1";
  j["n"] = cfg.n;
  j["k"] = cfg.k;
  j["seed"] = cfg.seed;
  j["quad_nodes"] = cfg.quad_nodes;
  j["quotient"] = r.quotient;
  j["bound"] = r.bound;
  j["margin"] = r.margin;
  j["trace_residual"] = r.trace_residual;
  j["divergence_residual"] = r.divergence_residual;
  j["integration_by_parts_residual"] = r.ibp_residual;
  j["bound_satisfied"] = r.bound_satisfied;
  const std::string text = j.dump(2) + "\n";
  if (cfg.out.empty())
    std::cout << text;
  else {
    std::ofstream out(cfg.out);
    out << text;
  }
  return r.bound_satisfied && r.bound_applicable ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lovelock: double-form curvature calculus and its verification suites"};
  app.require_subcommand(1);

  FlagSet fv, fi, fl, fr;
  auto* verify = app.add_subcommand("verify", "run a named identity suite and report pass/fail per check");
  verify->add_option("--suite", fv.suite, "algebra | curvature | linearization | all");
  register_common(verify, fv);
  auto* invariants = app.add_subcommand("invariants", "curvature invariants of a background at sampled points");
  register_common(invariants, fi);
  auto* linearize = app.add_subcommand("linearize", "closed-form vs finite-difference linearization cross-check");
  linearize->add_option("--direction", fl.direction, "random | conformal | lie");
  register_common(linearize, fl);
  auto* rayleigh = app.add_subcommand("rayleigh", "Rayleigh-quotient bound for the stability operator on S^3");
  register_common(rayleigh, fr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (verify->parsed()) return cmd_verify(verify, fv);
    if (invariants->parsed()) return cmd_invariants(invariants, fi);
    if (linearize->parsed()) return cmd_linearize(linearize, fl);
    if (rayleigh->parsed()) return cmd_rayleigh(rayleigh, fr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
