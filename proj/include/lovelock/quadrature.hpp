// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "lovelock/fields.hpp"
#include "lovelock/linalg.hpp"

namespace lovelock::fields {

// Quadrature over a round sphere in the iterated-angle chart. Polar angles
// carry Gauss-Legendre nodes mapped to (0, pi) (interior, so the coordinate
// poles are never sampled); the azimuth uses a midpoint-offset uniform grid,
// which is spectrally accurate for periodic integrands. Weights include the
// metric volume Jacobian r^n prod sin^{n-i}.
class SphereQuadrature {
 public:
  struct Node {
    std::vector<double> x;  // angles, matching round_sphere_angles charts
    double weight;
  };

  static SphereQuadrature build(int n, double radius, int polar_nodes, int azimuth_nodes) {
    if (n < 2 || n > 3) throw std::invalid_argument("SphereQuadrature: n in {2,3}");
    if (polar_nodes < 2 || azimuth_nodes < 4) throw std::invalid_argument("SphereQuadrature: too few nodes");
    SphereQuadrature q;
    q.n_ = n;
    q.radius_ = radius;
    const auto gl = linalg::gauss_legendre(polar_nodes);
    const double jac_polar = M_PI / 2;  // [-1,1] -> (0,pi)
    const double dphi = 2 * M_PI / azimuth_nodes;
    const double rn = std::pow(radius, n);
    if (n == 2) {
      for (int i = 0; i < polar_nodes; ++i) {
        const double t0 = M_PI * (gl.nodes[static_cast<std::size_t>(i)] + 1) / 2;
        for (int a = 0; a < azimuth_nodes; ++a) {
          Node node;
          node.x = {t0, dphi * (a + 0.5)};
          node.weight = rn * std::sin(t0) * gl.weights[static_cast<std::size_t>(i)] * jac_polar * dphi;
          q.nodes_.push_back(std::move(node));
        }
      }
    } else {
      for (int i = 0; i < polar_nodes; ++i) {
        const double t0 = M_PI * (gl.nodes[static_cast<std::size_t>(i)] + 1) / 2;
        for (int j = 0; j < polar_nodes; ++j) {
          const double t1 = M_PI * (gl.nodes[static_cast<std::size_t>(j)] + 1) / 2;
          for (int a = 0; a < azimuth_nodes; ++a) {
            Node node;
            node.x = {t0, t1, dphi * (a + 0.5)};
            node.weight = rn * std::sin(t0) * std::sin(t0) * std::sin(t1) *
                          gl.weights[static_cast<std::size_t>(i)] * gl.weights[static_cast<std::size_t>(j)] *
                          jac_polar * jac_polar * dphi;
            q.nodes_.push_back(std::move(node));
          }
        }
      }
    }
    return q;
  }

  int n() const { return n_; }
  double radius() const { return radius_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  static double known_volume(int n, double radius) {
    if (n == 2) return 4 * M_PI * radius * radius;
    if (n == 3) return 2 * M_PI * M_PI * radius * radius * radius;
    throw std::invalid_argument("known_volume: n in {2,3}");
  }

 private:
  int n_ = 0;
  double radius_ = 1.0;
  std::vector<Node> nodes_;
};

inline double integrate(const SphereQuadrature& q,
                        const std::function<double(const std::vector<double>&)>& f) {
  double acc = 0;
  for (const auto& node : q.nodes()) acc += node.weight * f(node.x);
  return acc;
}

}  // namespace lovelock::fields
