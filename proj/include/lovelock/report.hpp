// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lovelock/curvature.hpp"

namespace lovelock::cli {

// JSON view of a pointwise curvature stack for reports.
inline nlohmann::json curvature_pack_json(const curvature::CurvaturePack& pack) {
  nlohmann::json j;
  j["point"] = pack.x;
  j["n"] = pack.n;
  j["k"] = pack.k;
  j["scalar_curvature"] = pack.scalar;
  j["lovelock_scalar"] = pack.lovelock_scalar;
  j["lambda"] = pack.lambda;
  const auto defect = pack.lovelock_ricci - forms::metric_identity<double>(pack.n) * pack.lambda;
  j["defect_norm"] = defect.max_abs();
  j["identities"]["trace_identity_residual"] = pack.trace_identity_residual;
  j["identities"]["riemann_symmetry_residual"] = forms::symmetry_residual(pack.riemann);
  j["identities"]["frame_orthonormality_residual"] = pack.frame.orthonormality_residual();
  return j;
}

// Machine-readable outcome of one identity verification.
struct CheckReport {
  std::string check_id;
  std::string identity;  // what is being verified, in words
  std::map<std::string, double> params;
  double residual = 0;
  double tolerance = 0;
  std::optional<double> convergence_slope;
  std::optional<double> slope_low, slope_high;
  bool pass = false;
  double wall_time_ms = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["check_id"] = check_id;
    j["identity"] = identity;
    j["params"] = params;
    j["residual"] = residual;
    j["tolerance"] = tolerance;
    if (convergence_slope) {
      j["convergence_slope"] = *convergence_slope;
      j["slope_band"] = {*slope_low, *slope_high};
    }
    j["pass"] = pass;
    j["wall_time_ms"] = wall_time_ms;
    return j;
  }
};

inline nlohmann::json report_envelope(const std::vector<CheckReport>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) arr.push_back(c.to_json());
  nlohmann::json j;
  j["schema"] = "lovelock-report/1";
  j["checks"] = arr;
  return j;
}

// Run parameters: defaults, overridden by a key=value config file, overridden
// by command-line flags. A fully specified RunConfig determines a run.
struct RunConfig {
  std::string suite = "all";
  std::string family = "sphere";
  int n = 5;
  int k = 2;
  double mu = 1.0;
  double eps = 1e-4;
  double fd_step = 1e-4;
  std::uint64_t seed = 7;
  int quad_nodes = 10;
  double tol = 0;  // 0 keeps per-check defaults; positive overrides all
  std::string format = "json";
  std::string out;

  void apply_key(const std::string& key, const std::string& value) {
    try {
      if (key == "suite")
        suite = value;
      else if (key == "family")
        family = value;
      else if (key == "n")
        n = std::stoi(value);
      else if (key == "k")
        k = std::stoi(value);
      else if (key == "mu")
        mu = std::stod(value);
      else if (key == "eps")
        eps = std::stod(value);
      else if (key == "fd_step")
        fd_step = std::stod(value);
      else if (key == "seed")
        seed = static_cast<std::uint64_t>(std::stoull(value));
      else if (key == "quad_nodes")
        quad_nodes = std::stoi(value);
      else if (key == "tol")
        tol = std::stod(value);
      else if (key == "format")
        format = value;
      else if (key == "out")
        out = value;
      else
        throw std::invalid_argument("unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("bad value for config key '" + key + "': '" + value + "'");
    }
  }

  // Plain-text key=value files; '#' starts a comment.
  void apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
      apply_key(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
};

// Fixed-width table rendering of the same data as the JSON report.
inline std::string render_table(const std::vector<CheckReport>& checks) {
  std::ostringstream os;
  os << "check_id                                         residual      tolerance    slope   pass\n";
  for (const auto& c : checks) {
    std::ostringstream id;
    id << c.check_id;
    std::string ids = id.str();
    if (ids.size() < 48) ids.resize(48, ' ');
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-12.3e  %-11.1e", c.residual, c.tolerance);
    os << ids << buf;
    if (c.convergence_slope)
      std::snprintf(buf, sizeof(buf), "  %5.2f", *c.convergence_slope);
    else
      std::snprintf(buf, sizeof(buf), "  %5s", "-");
    os << buf << "   " << (c.pass ? "ok" : "FAIL") << "\n";
  }
  return os.str();
}

}  // namespace lovelock::cli
