// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace lovelock {

// Truncated multivariate Taylor arithmetic. A Jet carries the coefficients of
// a function's Taylor expansion at a point, up to a fixed total degree, over
// up to 8 chart variables. Evaluating an analytic formula on seeded variable
// jets yields every partial derivative of the result to machine precision,
// which is what supplies "analytic jets" of metrics and deformation fields.
//
// Monomials are enumerated by total degree, then lexicographically, so the
// coefficients of any lower order form a prefix and truncation is a copy.
class JetSpace {
 public:
  int nvars = 0;
  int order = 0;
  std::vector<std::vector<int>> exps;       // exponent vector per monomial
  std::vector<int> degree;                  // total degree per monomial
  std::vector<std::size_t> count_to_order;  // #monomials of degree <= d, d = 0..order

  static std::shared_ptr<const JetSpace> get(int nvars, int order) {
    static std::mutex mu;
    static std::unordered_map<int, std::shared_ptr<const JetSpace>> cache;
    if (nvars < 1 || nvars > 8 || order < 0 || order > 8)
      throw std::invalid_argument("JetSpace: nvars in [1,8], order in [0,8]");
    const int key = nvars * 16 + order;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto space = std::shared_ptr<const JetSpace>(new JetSpace(nvars, order));
    cache.emplace(key, space);
    return space;
  }

  std::size_t size() const { return exps.size(); }

  int rank_of(const std::vector<int>& alpha) const {
    const auto it = rank_.find(pack(alpha));
    return it == rank_.end() ? -1 : it->second;
  }

  // Flattened pair list (i, j, k): monomial_i * monomial_j contributes to k.
  struct ProdEntry {
    std::int32_t i, j, k;
  };
  const std::vector<ProdEntry>& prod_table() const { return prod_; }

 private:
  JetSpace(int nv, int ord) : nvars(nv), order(ord) {
    std::vector<int> alpha(static_cast<std::size_t>(nv), 0);
    count_to_order.resize(static_cast<std::size_t>(ord) + 1);
    for (int d = 0; d <= ord; ++d) {
      emit(alpha, 0, d);
      count_to_order[static_cast<std::size_t>(d)] = exps.size();
    }
    for (std::size_t m = 0; m < exps.size(); ++m) rank_[pack(exps[m])] = static_cast<int>(m);
    for (std::size_t i = 0; i < exps.size(); ++i)
      for (std::size_t j = 0; j < exps.size(); ++j) {
        if (degree[i] + degree[j] > ord) continue;
        std::vector<int> sum(static_cast<std::size_t>(nv));
        for (int v = 0; v < nv; ++v) sum[static_cast<std::size_t>(v)] = exps[i][static_cast<std::size_t>(v)] + exps[j][static_cast<std::size_t>(v)];
        prod_.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), rank_.at(pack(sum))});
      }
  }

  void emit(std::vector<int>& alpha, int var, int remaining) {
    if (var == nvars - 1) {
      alpha[static_cast<std::size_t>(var)] = remaining;
      exps.push_back(alpha);
      degree.push_back(0);
      for (int v : alpha) degree.back() += v;
      return;
    }
    for (int e = remaining; e >= 0; --e) {  // lex order: larger first exponent first
      alpha[static_cast<std::size_t>(var)] = e;
      emit(alpha, var + 1, remaining - e);
    }
    alpha[static_cast<std::size_t>(var)] = 0;
  }

  static std::uint64_t pack(const std::vector<int>& alpha) {
    std::uint64_t key = 0;
    for (int v : alpha) key = (key << 8) | static_cast<std::uint64_t>(v);
    return key;
  }

  std::unordered_map<std::uint64_t, int> rank_;
  std::vector<ProdEntry> prod_;
};

class Jet {
 public:
  Jet() = default;
  explicit Jet(std::shared_ptr<const JetSpace> space) : space_(std::move(space)) {
    c_.assign(space_->size(), 0.0);
  }

  static Jet constant(const std::shared_ptr<const JetSpace>& space, double v) {
    Jet j(space);
    j.c_[0] = v;
    return j;
  }

  static Jet from_coefficients(const std::shared_ptr<const JetSpace>& space, std::vector<double> coeffs) {
    if (coeffs.size() != space->size()) throw std::invalid_argument("Jet::from_coefficients: size mismatch");
    Jet j(space);
    j.c_ = std::move(coeffs);
    return j;
  }

  static Jet variable(const std::shared_ptr<const JetSpace>& space, double v, int var) {
    Jet j(space);
    j.c_[0] = v;
    if (space->order >= 1) {
      std::vector<int> alpha(static_cast<std::size_t>(space->nvars), 0);
      alpha[static_cast<std::size_t>(var)] = 1;
      j.c_[static_cast<std::size_t>(space->rank_of(alpha))] = 1.0;
    }
    return j;
  }

  const std::shared_ptr<const JetSpace>& space() const { return space_; }
  int order() const { return space_ ? space_->order : 0; }
  double value() const { return c_.empty() ? 0.0 : c_[0]; }

  Jet truncated(int new_order) const {
    if (new_order >= order()) return *this;
    Jet out(JetSpace::get(space_->nvars, new_order));
    for (std::size_t m = 0; m < out.c_.size(); ++m) out.c_[m] = c_[m];
    return out;
  }

  // Partial derivative as a jet of one lower order.
  Jet derivative(int var) const {
    if (order() < 1) throw std::logic_error("Jet::derivative: order 0");
    Jet out(JetSpace::get(space_->nvars, space_->order - 1));
    const auto& oexps = out.space_->exps;
    std::vector<int> alpha;
    for (std::size_t m = 0; m < oexps.size(); ++m) {
      alpha = oexps[m];
      alpha[static_cast<std::size_t>(var)] += 1;
      const int src = space_->rank_of(alpha);
      out.c_[m] = c_[static_cast<std::size_t>(src)] * alpha[static_cast<std::size_t>(var)];
    }
    return out;
  }

  // Value of the mixed partial with multiplicities alpha (factorial-weighted
  // Taylor coefficient).
  double partial(const std::vector<int>& alpha) const {
    const int r = space_->rank_of(alpha);
    if (r < 0) throw std::invalid_argument("Jet::partial: order too high");
    double fact = 1;
    for (int e : alpha)
      for (int i = 2; i <= e; ++i) fact *= i;
    return c_[static_cast<std::size_t>(r)] * fact;
  }

  friend Jet operator+(const Jet& a, const Jet& b) {
    auto [x, y] = align(a, b);
    for (std::size_t m = 0; m < x.c_.size(); ++m) x.c_[m] += y.c_[m];
    return x;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    auto [x, y] = align(a, b);
    for (std::size_t m = 0; m < x.c_.size(); ++m) x.c_[m] -= y.c_[m];
    return x;
  }
  Jet operator-() const {
    Jet out = *this;
    for (auto& v : out.c_) v = -v;
    return out;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    auto [x, y] = align(a, b);
    Jet out(x.space_);
    for (const auto& e : x.space_->prod_table())
      out.c_[static_cast<std::size_t>(e.k)] += x.c_[static_cast<std::size_t>(e.i)] * y.c_[static_cast<std::size_t>(e.j)];
    return out;
  }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

  friend Jet operator+(const Jet& a, double s) {
    Jet out = a;
    out.c_[0] += s;
    return out;
  }
  friend Jet operator+(double s, const Jet& a) { return a + s; }
  friend Jet operator-(const Jet& a, double s) { return a + (-s); }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(const Jet& a, double s) {
    Jet out = a;
    for (auto& v : out.c_) v *= s;
    return out;
  }
  friend Jet operator*(double s, const Jet& a) { return a * s; }
  friend Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }
  friend Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

  Jet& operator+=(const Jet& o) { return *this = *this + o; }
  Jet& operator-=(const Jet& o) { return *this = *this - o; }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }
  Jet& operator*=(double s) { return *this = *this * s; }

  // Applies an analytic function given the values of its derivatives at the
  // jet's base point: f(a) = sum_m derivs[m]/m! (a - a0)^m.
  static Jet analytic(const Jet& a, const std::vector<double>& derivs) {
    const int K = a.order();
    Jet eps = a;
    eps.c_[0] = 0.0;
    Jet acc = Jet::constant(a.space_, derivs[0]);
    Jet pw = Jet::constant(a.space_, 1.0);
    double fact = 1;
    for (int m = 1; m <= K; ++m) {
      pw = pw * eps;
      fact *= m;
      acc += pw * (derivs[static_cast<std::size_t>(m)] / fact);
    }
    return acc;
  }

  friend Jet reciprocal(const Jet& a) {
    const double x = a.value();
    if (x == 0.0) throw std::domain_error("Jet: reciprocal at zero");
    // d[m] = (-1)^m m! / x^{m+1}
    std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
    double sign = 1, xf = 1.0 / x, mfact = 1;
    for (int m = 0; m <= a.order(); ++m) {
      d[static_cast<std::size_t>(m)] = sign * mfact * xf;
      sign = -sign;
      xf /= x;
      mfact *= (m + 1);
    }
    return analytic(a, d);
  }

  friend Jet sin(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    const double cycle[4] = {s, c, -s, -c};
    std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
    for (int m = 0; m <= a.order(); ++m) d[static_cast<std::size_t>(m)] = cycle[m % 4];
    return analytic(a, d);
  }

  friend Jet cos(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    const double cycle[4] = {c, -s, -c, s};
    std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
    for (int m = 0; m <= a.order(); ++m) d[static_cast<std::size_t>(m)] = cycle[m % 4];
    return analytic(a, d);
  }

  friend Jet sqrt(const Jet& a) {
    const double x = a.value();
    if (x <= 0.0) throw std::domain_error("Jet: sqrt at nonpositive value");
    std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
    double cur = std::sqrt(x), expo = 0.5;
    d[0] = cur;
    double coeff = 1;
    for (int m = 1; m <= a.order(); ++m) {
      coeff *= expo;
      expo -= 1.0;
      d[static_cast<std::size_t>(m)] = coeff * std::pow(x, 0.5 - m);
    }
    return analytic(a, d);
  }

 private:
  static std::pair<Jet, Jet> align(const Jet& a, const Jet& b) {
    if (a.space_ == b.space_) return {a, b};
    const int ord = std::min(a.order(), b.order());
    return {a.truncated(ord), b.truncated(ord)};
  }

  std::shared_ptr<const JetSpace> space_;
  std::vector<double> c_;
};

// Seeds the chart coordinates of a point as jet variables of a given order.
inline std::vector<Jet> seed_point(const std::vector<double>& x, int order) {
  const int n = static_cast<int>(x.size());
  auto space = JetSpace::get(n, order);
  std::vector<Jet> out;
  out.reserve(x.size());
  for (int i = 0; i < n; ++i) out.push_back(Jet::variable(space, x[static_cast<std::size_t>(i)], i));
  return out;
}

}  // namespace lovelock
