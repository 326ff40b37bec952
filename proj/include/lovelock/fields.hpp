// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lovelock/jet.hpp"
#include "lovelock/linalg.hpp"
#include "lovelock/rng.hpp"

namespace lovelock::fields {

struct ChartBox {
  std::vector<double> lo, hi;

  std::vector<double> random_point(Rng& rng, double margin_fraction = 0.1) const {
    std::vector<double> x(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const double m = (hi[i] - lo[i]) * margin_fraction;
      x[i] = rng.uniform(lo[i] + m, hi[i] - m);
    }
    return x;
  }

  bool contains(const std::vector<double>& x, double margin = 0.0) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] + margin || x[i] > hi[i] - margin) return false;
    return true;
  }
};

// Component evaluator over jet-valued chart coordinates. Seeding the input at
// order m yields all partial derivatives of the components up to order m.
using JetEvaluator = std::function<std::vector<Jet>(const std::vector<Jet>&)>;

namespace detail {
inline std::shared_ptr<const JetSpace> space_of(const std::vector<Jet>& x) {
  return x.front().space();
}
}  // namespace detail

// A symmetric 2-tensor field h_ij on a chart.
class SymTensorField {
 public:
  SymTensorField() = default;
  SymTensorField(std::string name, int n, JetEvaluator eval)
      : name_(std::move(name)), n_(n), eval_(std::move(eval)) {}

  const std::string& name() const { return name_; }
  int n() const { return n_; }

  std::vector<Jet> eval_jets(const std::vector<Jet>& x) const { return eval_(x); }

  std::vector<double> eval(const std::vector<double>& x) const {
    const auto jets = eval_(seed_point(x, 0));
    std::vector<double> out(jets.size());
    for (std::size_t i = 0; i < jets.size(); ++i) out[i] = jets[i].value();
    return out;
  }

  double symmetry_residual(const std::vector<double>& x) const {
    const auto v = eval(x);
    double m = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        m = std::max(m, std::fabs(v[static_cast<std::size_t>(i * n_ + j)] - v[static_cast<std::size_t>(j * n_ + i)]));
    return m;
  }

  friend SymTensorField operator*(double s, const SymTensorField& f) {
    auto eval = f.eval_;
    return SymTensorField(f.name_ + "_scaled", f.n_, [eval, s](const std::vector<Jet>& x) {
      auto v = eval(x);
      for (auto& c : v) c *= s;
      return v;
    });
  }

  friend SymTensorField operator+(const SymTensorField& a, const SymTensorField& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("SymTensorField: dimension mismatch");
    auto ea = a.eval_, eb = b.eval_;
    return SymTensorField(a.name_ + "+" + b.name_, a.n_, [ea, eb](const std::vector<Jet>& x) {
      auto va = ea(x);
      const auto vb = eb(x);
      for (std::size_t i = 0; i < va.size(); ++i) va[i] += vb[i];
      return va;
    });
  }

 private:
  std::string name_;
  int n_ = 0;
  JetEvaluator eval_;
};

// A 1-form field on a chart (n components).
class OneFormField {
 public:
  OneFormField() = default;
  OneFormField(std::string name, int n, JetEvaluator eval)
      : name_(std::move(name)), n_(n), eval_(std::move(eval)) {}

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  std::vector<Jet> eval_jets(const std::vector<Jet>& x) const { return eval_(x); }

 private:
  std::string name_;
  int n_ = 0;
  JetEvaluator eval_;
};

// A Riemannian metric given by its Gram matrix on a single chart with
// margins. Everything is immutable; evaluators are pure.
class MetricFamily {
 public:
  // Chart-to-ambient embedding (unit normal bundle style data is not needed;
  // only the map and its Jacobian, both jet-evaluable).
  struct Embedding {
    int ambient_dim = 0;
    JetEvaluator map;       // ambient_dim entries
    JetEvaluator jacobian;  // ambient_dim * n entries, row-major (A, i)
  };

  MetricFamily() = default;
  MetricFamily(std::string name, int n, ChartBox chart, JetEvaluator gram)
      : name_(std::move(name)), n_(n), chart_(std::move(chart)), gram_(std::move(gram)) {}

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  const ChartBox& chart() const { return chart_; }
  const std::map<std::string, double>& params() const { return params_; }

  bool is_space_form() const { return space_form_; }
  double mu() const { return mu_; }

  std::vector<Jet> gram_jets_at(const std::vector<Jet>& x) const { return gram_(x); }

  std::vector<Jet> gram_jets(const std::vector<double>& x, int order) const {
    return gram_(seed_point(x, order));
  }

  std::vector<double> gram(const std::vector<double>& x) const {
    const auto jets = gram_jets(x, 0);
    std::vector<double> out(jets.size());
    for (std::size_t i = 0; i < jets.size(); ++i) out[i] = jets[i].value();
    return out;
  }

  const std::optional<Embedding>& embedding() const { return embedding_; }

  MetricFamily with_params(std::map<std::string, double> p) const {
    MetricFamily f = *this;
    f.params_ = std::move(p);
    return f;
  }

  MetricFamily tagged_space_form(double mu) const {
    MetricFamily f = *this;
    f.space_form_ = true;
    f.mu_ = mu;
    return f;
  }

  MetricFamily with_embedding(Embedding e) const {
    MetricFamily f = *this;
    f.embedding_ = std::move(e);
    return f;
  }

 private:
  std::string name_;
  int n_ = 0;
  ChartBox chart_;
  JetEvaluator gram_;
  std::map<std::string, double> params_;
  bool space_form_ = false;
  double mu_ = 0.0;
  std::optional<Embedding> embedding_;
};

// ---------------------------------------------------------------------------
// Built-in families
// ---------------------------------------------------------------------------

inline MetricFamily flat_torus(int n) {
  ChartBox box{std::vector<double>(n, 0.0), std::vector<double>(n, 2 * M_PI)};
  JetEvaluator eval = [n](const std::vector<Jet>& x) {
    const auto space = detail::space_of(x);
    std::vector<Jet> g(static_cast<std::size_t>(n) * n, Jet::constant(space, 0.0));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i * n + i)] = Jet::constant(space, 1.0);
    return g;
  };
  auto f = MetricFamily("flat_torus", n, box, eval).tagged_space_form(0.0);
  return f.with_params({{"n", static_cast<double>(n)}});
}

// Conformally flat chart for both signs of the curvature:
//   g_ij(x) = 4 delta_ij / (1 + mu |x|^2)^2 .
// mu > 0 covers the round sphere (stereographic chart), mu < 0 the Poincare
// ball; the chart box keeps corners well inside the ball when mu < 0.
inline MetricFamily conformal_space_form(int n, double mu, const std::string& name) {
  double half_width;
  if (mu > 0)
    half_width = 0.9 / std::sqrt(mu);
  else if (mu < 0)
    half_width = 0.55 / std::sqrt(-mu * static_cast<double>(n));
  else
    half_width = 1.0;
  ChartBox box{std::vector<double>(n, -half_width), std::vector<double>(n, half_width)};
  JetEvaluator eval = [n, mu](const std::vector<Jet>& x) {
    const auto space = detail::space_of(x);
    Jet r2 = Jet::constant(space, 0.0);
    for (const auto& xi : x) r2 += xi * xi;
    const Jet den = 1.0 + mu * r2;
    const Jet conf = 4.0 / (den * den);
    std::vector<Jet> g(static_cast<std::size_t>(n) * n, Jet::constant(space, 0.0));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i * n + i)] = conf;
    return g;
  };
  auto f = MetricFamily(name, n, box, eval).tagged_space_form(mu);
  return f.with_params({{"n", static_cast<double>(n)}, {"mu", mu}});
}

inline MetricFamily round_sphere_stereographic(int n, double mu) {
  if (mu <= 0) throw std::invalid_argument("round_sphere_stereographic: mu > 0 required");
  return conformal_space_form(n, mu, "round_sphere_stereographic");
}

inline MetricFamily hyperbolic_ball(int n, double mu) {
  if (mu >= 0) throw std::invalid_argument("hyperbolic_ball: mu < 0 required");
  return conformal_space_form(n, mu, "hyperbolic_ball");
}

// Iterated-angle chart of the round sphere of radius r = 1/sqrt(mu):
//   g = r^2 diag(1, sin^2 t0, sin^2 t0 sin^2 t1, ...).
// Carries the chart-to-ambient embedding, so globally smooth test fields can
// be produced by restricting ambient tensors.
inline MetricFamily round_sphere_angles(int n, double mu) {
  if (mu <= 0) throw std::invalid_argument("round_sphere_angles: mu > 0 required");
  const double r = 1.0 / std::sqrt(mu);
  const double pole_margin = 0.25;
  std::vector<double> lo(n, pole_margin), hi(n, M_PI - pole_margin);
  lo[static_cast<std::size_t>(n - 1)] = 0.0;
  hi[static_cast<std::size_t>(n - 1)] = 2 * M_PI;
  ChartBox box{lo, hi};

  JetEvaluator eval = [n, r](const std::vector<Jet>& x) {
    const auto space = detail::space_of(x);
    std::vector<Jet> g(static_cast<std::size_t>(n) * n, Jet::constant(space, 0.0));
    Jet prod = Jet::constant(space, r * r);
    for (int i = 0; i < n; ++i) {
      g[static_cast<std::size_t>(i * n + i)] = prod;
      if (i + 1 < n) {
        const Jet s = sin(x[static_cast<std::size_t>(i)]);
        prod = prod * (s * s);
      }
    }
    return g;
  };

  MetricFamily::Embedding emb;
  emb.ambient_dim = n + 1;
  emb.map = [n, r](const std::vector<Jet>& x) {
    const auto space = detail::space_of(x);
    std::vector<Jet> E(static_cast<std::size_t>(n) + 1, Jet::constant(space, 0.0));
    Jet prod = Jet::constant(space, r);
    for (int a = 0; a < n; ++a) {
      E[static_cast<std::size_t>(a)] = prod * cos(x[static_cast<std::size_t>(a)]);
      prod = prod * sin(x[static_cast<std::size_t>(a)]);
    }
    E[static_cast<std::size_t>(n)] = prod;
    return E;
  };
  emb.jacobian = [n, r](const std::vector<Jet>& x) {
    const auto space = detail::space_of(x);
    std::vector<Jet> sines(static_cast<std::size_t>(n)), cosines(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      sines[static_cast<std::size_t>(i)] = sin(x[static_cast<std::size_t>(i)]);
      cosines[static_cast<std::size_t>(i)] = cos(x[static_cast<std::size_t>(i)]);
    }
    const Jet zero = Jet::constant(space, 0.0);
    std::vector<Jet> J(static_cast<std::size_t>((n + 1) * n), zero);
    // Row A: E_A = r (prod_{j<A} sin t_j) cos t_A for A < n; E_n = r prod sin.
    for (int A = 0; A <= n; ++A)
      for (int i = 0; i < n; ++i) {
        if (A < n && i > A) continue;
        Jet term = Jet::constant(space, r);
        const int limit = (A < n) ? A : n;
        bool zero_term = false;
        for (int j = 0; j < limit; ++j) {
          if (j == i)
            term = term * cosines[static_cast<std::size_t>(j)];
          else
            term = term * sines[static_cast<std::size_t>(j)];
        }
        if (A < n) {
          if (i == A)
            term = term * (-sines[static_cast<std::size_t>(A)]);
          else
            term = term * cosines[static_cast<std::size_t>(A)];
        } else if (i >= n) {
          zero_term = true;
        }
        if (!zero_term) J[static_cast<std::size_t>(A * n + i)] = term;
      }
    return J;
  };

  auto f = MetricFamily("round_sphere_angles", n, box, eval).tagged_space_form(mu).with_embedding(emb);
  return f.with_params({{"n", static_cast<double>(n)}, {"mu", mu}});
}

// Riemannian product: block-diagonal Gram matrix on the concatenated chart.
inline MetricFamily product(const MetricFamily& a, const MetricFamily& b) {
  const int na = a.n(), nb = b.n(), n = na + nb;
  ChartBox box;
  box.lo = a.chart().lo;
  box.lo.insert(box.lo.end(), b.chart().lo.begin(), b.chart().lo.end());
  box.hi = a.chart().hi;
  box.hi.insert(box.hi.end(), b.chart().hi.begin(), b.chart().hi.end());
  auto ga = [&a] { return a; }();
  auto gb = [&b] { return b; }();
  JetEvaluator eval = [ga, gb, na, nb, n](const std::vector<Jet>& x) {
    const auto space = detail::space_of(x);
    const std::vector<Jet> xa(x.begin(), x.begin() + na);
    const std::vector<Jet> xb(x.begin() + na, x.end());
    const auto block_a = ga.gram_jets_at(xa);
    const auto block_b = gb.gram_jets_at(xb);
    std::vector<Jet> g(static_cast<std::size_t>(n) * n, Jet::constant(space, 0.0));
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < na; ++j)
        g[static_cast<std::size_t>(i * n + j)] = block_a[static_cast<std::size_t>(i * na + j)];
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j)
        g[static_cast<std::size_t>((na + i) * n + (na + j))] = block_b[static_cast<std::size_t>(i * nb + j)];
    return g;
  };
  auto f = MetricFamily("product(" + a.name() + "," + b.name() + ")", n, box, eval);
  return f.with_params({{"n", static_cast<double>(n)}});
}

// Seed-deterministic symmetric trigonometric polynomial field. Integer
// frequencies make it 2*pi-periodic, hence globally smooth on tori; on other
// charts it is a smooth local field. The sup of each component is bounded by
// `amplitude`; degree 0 degenerates to a constant matrix.
inline SymTensorField random_sym_field(std::uint64_t seed, int n, int degree, double amplitude) {
  struct Term {
    int i, j;
    std::vector<int> freq;
    double coef;
    bool use_sin;
  };
  Rng rng(seed, "random_sym_field");
  std::vector<Term> terms;
  const int terms_per_entry = degree == 0 ? 1 : 3;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double total = 0;
      std::vector<Term> local;
      for (int t = 0; t < terms_per_entry; ++t) {
        Term term;
        term.i = i;
        term.j = j;
        term.freq.resize(static_cast<std::size_t>(n), 0);
        if (degree > 0) {
          bool nonzero = false;
          for (int v = 0; v < n; ++v) {
            term.freq[static_cast<std::size_t>(v)] = static_cast<int>(rng.int_range(-degree, degree));
            nonzero |= term.freq[static_cast<std::size_t>(v)] != 0;
          }
          if (!nonzero) term.freq[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)))] = 1;
        }
        term.coef = rng.uniform(-1, 1);
        term.use_sin = degree > 0 && rng.below(2) == 1;
        total += std::fabs(term.coef);
        local.push_back(std::move(term));
      }
      const double scale = total > 0 ? amplitude / total : 0.0;
      for (auto& term : local) {
        term.coef *= scale;
        terms.push_back(std::move(term));
      }
    }

  JetEvaluator eval = [terms, n](const std::vector<Jet>& x) {
    const auto space = detail::space_of(x);
    std::vector<Jet> h(static_cast<std::size_t>(n) * n, Jet::constant(space, 0.0));
    for (const auto& term : terms) {
      Jet phase = Jet::constant(space, 0.0);
      bool constant_term = true;
      for (int v = 0; v < n; ++v)
        if (term.freq[static_cast<std::size_t>(v)] != 0) {
          phase += static_cast<double>(term.freq[static_cast<std::size_t>(v)]) * x[static_cast<std::size_t>(v)];
          constant_term = false;
        }
      Jet val = constant_term ? Jet::constant(space, term.coef)
                              : (term.use_sin ? sin(phase) : cos(phase)) * term.coef;
      h[static_cast<std::size_t>(term.i * n + term.j)] += val;
      if (term.i != term.j) h[static_cast<std::size_t>(term.j * n + term.i)] += val;
    }
    return h;
  };
  return SymTensorField("random_sym_field", n, eval);
}

inline OneFormField random_one_form(std::uint64_t seed, int n, int degree, double amplitude) {
  struct Term {
    int i;
    std::vector<int> freq;
    double coef;
    bool use_sin;
  };
  Rng rng(seed, "random_one_form");
  std::vector<Term> terms;
  for (int i = 0; i < n; ++i) {
    double total = 0;
    std::vector<Term> local;
    for (int t = 0; t < 3; ++t) {
      Term term;
      term.i = i;
      term.freq.resize(static_cast<std::size_t>(n), 0);
      bool nonzero = false;
      for (int v = 0; v < n; ++v) {
        term.freq[static_cast<std::size_t>(v)] = static_cast<int>(rng.int_range(-std::max(degree, 1), std::max(degree, 1)));
        nonzero |= term.freq[static_cast<std::size_t>(v)] != 0;
      }
      if (!nonzero) term.freq[0] = 1;
      term.coef = rng.uniform(-1, 1);
      term.use_sin = rng.below(2) == 1;
      total += std::fabs(term.coef);
      local.push_back(std::move(term));
    }
    const double scale = total > 0 ? amplitude / total : 0.0;
    for (auto& term : local) {
      term.coef *= scale;
      terms.push_back(std::move(term));
    }
  }
  JetEvaluator eval = [terms, n](const std::vector<Jet>& x) {
    const auto space = detail::space_of(x);
    std::vector<Jet> w(static_cast<std::size_t>(n), Jet::constant(space, 0.0));
    for (const auto& term : terms) {
      Jet phase = Jet::constant(space, 0.0);
      for (int v = 0; v < n; ++v)
        if (term.freq[static_cast<std::size_t>(v)] != 0)
          phase += static_cast<double>(term.freq[static_cast<std::size_t>(v)]) * x[static_cast<std::size_t>(v)];
      w[static_cast<std::size_t>(term.i)] += (term.use_sin ? sin(phase) : cos(phase)) * term.coef;
    }
    return w;
  };
  return OneFormField("random_one_form", n, eval);
}

// Adds eps times a seeded trigonometric perturbation to a base family.
inline MetricFamily perturbed(const MetricFamily& base, double eps, std::uint64_t seed) {
  const int n = base.n();
  const auto field = random_sym_field(seed, n, 1, 1.0);
  auto base_copy = base;
  JetEvaluator eval = [base_copy, field, eps, n](const std::vector<Jet>& x) {
    auto g = base_copy.gram_jets_at(x);
    const auto h = field.eval_jets(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += eps * h[i];
    return g;
  };
  auto params = base.params();
  params["eps"] = eps;
  params["seed"] = static_cast<double>(seed);
  return MetricFamily("perturbed(" + base.name() + ")", n, base.chart(), eval).with_params(params);
}

// Name-keyed factory for the built-in families. Recognized parameter keys:
// mu, eps, seed, r (first factor dimension of a product).
inline MetricFamily builtin(const std::string& name, int n, const std::map<std::string, double>& params = {}) {
  auto get = [&params](const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "flat_torus") return flat_torus(n);
  if (name == "round_sphere_stereographic") return round_sphere_stereographic(n, get("mu", 1.0));
  if (name == "round_sphere_angles") return round_sphere_angles(n, get("mu", 1.0));
  if (name == "hyperbolic_ball") return hyperbolic_ball(n, get("mu", -1.0));
  if (name == "perturbed") {
    return perturbed(flat_torus(n), get("eps", 0.05), static_cast<std::uint64_t>(get("seed", 1.0)));
  }
  if (name == "product") {
    const int r = static_cast<int>(get("r", 2.0));
    if (r <= 0 || r >= n) throw std::invalid_argument("builtin(product): need 0 < r < n");
    auto first = perturbed(round_sphere_stereographic(r, get("mu", 1.0)), get("eps", 0.1),
                           static_cast<std::uint64_t>(get("seed", 1.0)));
    return product(first, flat_torus(n - r));
  }
  throw std::invalid_argument("builtin: unknown family '" + name + "'");
}

// ---------------------------------------------------------------------------
// Fields derived from sphere embeddings
// ---------------------------------------------------------------------------

// Restriction of an ambient symmetric 2-tensor to an embedded sphere chart:
// h_ij = dE_A/dx_i H_AB(E) dE_B/dx_j.
inline SymTensorField pullback_sym_field(const MetricFamily& family, std::string name,
                                         JetEvaluator ambient) {
  if (!family.embedding()) throw std::invalid_argument("pullback_sym_field: family has no embedding");
  const auto emb = *family.embedding();
  const int n = family.n();
  JetEvaluator eval = [emb, ambient, n](const std::vector<Jet>& x) {
    const auto space = detail::space_of(x);
    const auto E = emb.map(x);
    const auto J = emb.jacobian(x);
    const auto H = ambient(E);
    const int N = emb.ambient_dim;
    std::vector<Jet> h(static_cast<std::size_t>(n) * n, Jet::constant(space, 0.0));
    for (int A = 0; A < N; ++A)
      for (int B = 0; B < N; ++B) {
        const Jet& HAB = H[static_cast<std::size_t>(A * N + B)];
        if (HAB.order() == 0 && HAB.value() == 0.0) continue;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            h[static_cast<std::size_t>(i * n + j)] +=
                J[static_cast<std::size_t>(A * n + i)] * HAB * J[static_cast<std::size_t>(B * n + j)];
      }
    return h;
  };
  return SymTensorField(std::move(name), n, eval);
}

inline OneFormField pullback_one_form(const MetricFamily& family, std::string name, JetEvaluator ambient) {
  if (!family.embedding()) throw std::invalid_argument("pullback_one_form: family has no embedding");
  const auto emb = *family.embedding();
  const int n = family.n();
  JetEvaluator eval = [emb, ambient, n](const std::vector<Jet>& x) {
    const auto space = detail::space_of(x);
    const auto E = emb.map(x);
    const auto J = emb.jacobian(x);
    const auto W = ambient(E);
    const int N = emb.ambient_dim;
    std::vector<Jet> w(static_cast<std::size_t>(n), Jet::constant(space, 0.0));
    for (int A = 0; A < N; ++A)
      for (int i = 0; i < n; ++i)
        w[static_cast<std::size_t>(i)] += J[static_cast<std::size_t>(A * n + i)] * W[static_cast<std::size_t>(A)];
    return w;
  };
  return OneFormField(std::move(name), n, eval);
}

// Seeded ambient symmetric tensor with affine coefficients in the ambient
// coordinates; restricting it to the sphere gives a globally smooth field.
inline SymTensorField random_ambient_sphere_field(const MetricFamily& sphere, std::uint64_t seed,
                                                  double amplitude) {
  if (!sphere.embedding()) throw std::invalid_argument("random_ambient_sphere_field: no embedding");
  const int N = sphere.embedding()->ambient_dim;
  Rng rng(seed, "ambient_sym_field");
  std::vector<double> c0(static_cast<std::size_t>(N) * N), c1(static_cast<std::size_t>(N) * N * N);
  for (int A = 0; A < N; ++A)
    for (int B = A; B < N; ++B) {
      const double v = rng.uniform(-1, 1);
      c0[static_cast<std::size_t>(A * N + B)] = v;
      c0[static_cast<std::size_t>(B * N + A)] = v;
      for (int C = 0; C < N; ++C) {
        const double w = rng.uniform(-1, 1);
        c1[static_cast<std::size_t>((A * N + B) * N + C)] = w;
        c1[static_cast<std::size_t>((B * N + A) * N + C)] = w;
      }
    }
  const double scale = amplitude / (1.0 + static_cast<double>(N));
  JetEvaluator ambient = [c0, c1, N, scale](const std::vector<Jet>& q) {
    const auto space = detail::space_of(q);
    std::vector<Jet> H(static_cast<std::size_t>(N) * N, Jet::constant(space, 0.0));
    for (int A = 0; A < N; ++A)
      for (int B = 0; B < N; ++B) {
        Jet v = Jet::constant(space, c0[static_cast<std::size_t>(A * N + B)]);
        for (int C = 0; C < N; ++C)
          v += c1[static_cast<std::size_t>((A * N + B) * N + C)] * q[static_cast<std::size_t>(C)];
        H[static_cast<std::size_t>(A * N + B)] = v * scale;
      }
    return H;
  };
  return pullback_sym_field(sphere, "random_ambient_sphere_field", ambient);
}

// Seeded ambient 1-form with affine coefficients, restricted to the sphere;
// globally smooth, unlike chart-local trigonometric forms.
inline OneFormField random_ambient_one_form(const MetricFamily& sphere, std::uint64_t seed,
                                            double amplitude) {
  if (!sphere.embedding()) throw std::invalid_argument("random_ambient_one_form: no embedding");
  const int N = sphere.embedding()->ambient_dim;
  Rng rng(seed, "ambient_one_form");
  std::vector<double> c0(static_cast<std::size_t>(N)), c1(static_cast<std::size_t>(N) * N);
  for (auto& v : c0) v = rng.uniform(-1, 1);
  for (auto& v : c1) v = rng.uniform(-1, 1);
  const double scale = amplitude / (1.0 + static_cast<double>(N));
  JetEvaluator ambient = [c0, c1, N, scale](const std::vector<Jet>& q) {
    const auto space = detail::space_of(q);
    std::vector<Jet> w(static_cast<std::size_t>(N), Jet::constant(space, 0.0));
    for (int A = 0; A < N; ++A) {
      Jet v = Jet::constant(space, c0[static_cast<std::size_t>(A)]);
      for (int C = 0; C < N; ++C) v += c1[static_cast<std::size_t>(A * N + C)] * q[static_cast<std::size_t>(C)];
      w[static_cast<std::size_t>(A)] = v * scale;
    }
    return w;
  };
  return pullback_one_form(sphere, "random_ambient_one_form", ambient);
}

// The metric itself as a deformation direction.
inline SymTensorField metric_as_field(const MetricFamily& family) {
  auto fam = family;
  return SymTensorField("metric_direction", family.n(),
                        [fam](const std::vector<Jet>& x) { return fam.gram_jets_at(x); });
}

// Pointwise trace-free projection h - (tr_g h / n) g.
inline SymTensorField traceless_projection(const MetricFamily& family, const SymTensorField& h) {
  auto fam = family;
  auto base = h;
  const int n = family.n();
  JetEvaluator eval = [fam, base, n](const std::vector<Jet>& x) {
    const auto g = fam.gram_jets_at(x);
    auto hv = base.eval_jets(x);
    const auto space = detail::space_of(x);
    // tr_g h = g^{ab} h_ab
    auto ginv = linalg::inverse<Jet>(g, n, Jet::constant(space, 1.0),
                                     [](const Jet& j) { return std::fabs(j.value()); });
    Jet tr = Jet::constant(space, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        tr += ginv[static_cast<std::size_t>(a * n + b)] * hv[static_cast<std::size_t>(a * n + b)];
    const Jet factor = tr / static_cast<double>(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        hv[static_cast<std::size_t>(i * n + j)] -= factor * g[static_cast<std::size_t>(i * n + j)];
    return hv;
  };
  return SymTensorField(h.name() + "_traceless", n, eval);
}

// Exact transverse-traceless directions on round spheres.
//
// On S^3 the three ambient rotation fields obtained from the quaternion frame
// are a global orthogonal Killing frame; any constant-coefficient traceless
// symmetric combination of their duals is divergence free and trace free.
inline SymTensorField s3_invariant_tt_field(const MetricFamily& sphere3, const std::vector<double>& coef) {
  if (sphere3.n() != 3 || !sphere3.embedding())
    throw std::invalid_argument("s3_invariant_tt_field: need an embedded S^3 chart");
  if (coef.size() != 9) throw std::invalid_argument("s3_invariant_tt_field: need 3x3 coefficients");
  if (std::fabs(coef[0] + coef[4] + coef[8]) > 1e-14)
    throw std::invalid_argument("s3_invariant_tt_field: coefficients must be trace free");
  JetEvaluator ambient = [coef](const std::vector<Jet>& q) {
    const auto space = detail::space_of(q);
    // Tangent frame from quaternion multiplication by i, j, k.
    std::array<std::array<Jet, 4>, 3> X{{{-q[1], q[0], q[3], -q[2]},
                                         {-q[2], -q[3], q[0], q[1]},
                                         {-q[3], q[2], -q[1], q[0]}}};
    std::vector<Jet> H(16, Jet::constant(space, 0.0));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double c = coef[static_cast<std::size_t>(a * 3 + b)];
        if (c == 0.0) continue;
        for (int A = 0; A < 4; ++A)
          for (int B = 0; B < 4; ++B)
            H[static_cast<std::size_t>(A * 4 + B)] +=
                c * X[static_cast<std::size_t>(a)][static_cast<std::size_t>(A)] *
                X[static_cast<std::size_t>(b)][static_cast<std::size_t>(B)];
      }
    return H;
  };
  return pullback_sym_field(sphere3, "s3_invariant_tt_field", ambient);
}

inline SymTensorField s3_random_tt_field(const MetricFamily& sphere3, std::uint64_t seed) {
  Rng rng(seed, "s3_tt_coefficients");
  std::vector<double> c(9);
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      const double v = rng.uniform(-1, 1);
      c[static_cast<std::size_t>(a * 3 + b)] = v;
      c[static_cast<std::size_t>(b * 3 + a)] = v;
    }
  const double tr = (c[0] + c[4] + c[8]) / 3.0;
  c[0] -= tr;
  c[4] -= tr;
  c[8] -= tr;
  return s3_invariant_tt_field(sphere3, c);
}

// On odd spheres the rotation field q -> i q is Killing with unit speed and
// geodesic orbits; eta (x) eta minus its trace part is transverse traceless.
inline SymTensorField odd_sphere_reeb_tt_field(const MetricFamily& sphere) {
  if (!sphere.embedding()) throw std::invalid_argument("odd_sphere_reeb_tt_field: no embedding");
  const int N = sphere.embedding()->ambient_dim;
  if (N % 2 != 0) throw std::invalid_argument("odd_sphere_reeb_tt_field: need odd-dimensional sphere");
  const int n = sphere.n();
  const double mu = sphere.mu();
  const double r2 = 1.0 / mu;
  JetEvaluator ambient = [N](const std::vector<Jet>& q) {
    const auto space = detail::space_of(q);
    std::vector<Jet> xi(static_cast<std::size_t>(N), Jet::constant(space, 0.0));
    for (int m = 0; m + 1 < N; m += 2) {
      xi[static_cast<std::size_t>(m)] = -q[static_cast<std::size_t>(m + 1)];
      xi[static_cast<std::size_t>(m + 1)] = q[static_cast<std::size_t>(m)];
    }
    std::vector<Jet> H(static_cast<std::size_t>(N) * N, Jet::constant(space, 0.0));
    for (int A = 0; A < N; ++A)
      for (int B = 0; B < N; ++B)
        H[static_cast<std::size_t>(A * N + B)] = xi[static_cast<std::size_t>(A)] * xi[static_cast<std::size_t>(B)];
    return H;
  };
  const auto eta_sq = pullback_sym_field(sphere, "reeb_square", ambient);
  const auto trace_part = (-r2 / static_cast<double>(n)) * metric_as_field(sphere);
  return SymTensorField("odd_sphere_reeb_tt_field", n,
                        [eta_sq, trace_part](const std::vector<Jet>& x) {
                          auto a = eta_sq.eval_jets(x);
                          const auto b = trace_part.eval_jets(x);
                          for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
                          return a;
                        });
}

// ---------------------------------------------------------------------------
// Metric jets as derivative tables
// ---------------------------------------------------------------------------

enum class JetMethod { analytic, finite_difference };

// Partial-derivative tables of the Gram matrix at a point. Tables are stored
// for all derivative orders up to `order` (at most 4); mixed-partial symmetry
// holds by construction for both fill methods.
struct JetPoint {
  int n = 0;
  int order = 0;
  std::vector<double> x;
  std::vector<double> g;    // [i*n+j]
  std::vector<double> dg;   // [(a*n+i)*n+j]
  std::vector<double> d2g;  // [((a*n+b)*n+i)*n+j]
  std::vector<double> d3g;  // [(((a*n+b)*n+c)*n+i)*n+j]
  std::vector<double> d4g;  // [((((a*n+b)*n+c)*n+d)*n+i)*n+j]

  double dg_at(int a, int i, int j) const { return dg[static_cast<std::size_t>((a * n + i) * n + j)]; }
  double d2g_at(int a, int b, int i, int j) const {
    return d2g[static_cast<std::size_t>(((a * n + b) * n + i) * n + j)];
  }
  double d3g_at(int a, int b, int c, int i, int j) const {
    return d3g[static_cast<std::size_t>((((a * n + b) * n + c) * n + i) * n + j)];
  }

  double mixed_partial_symmetry_residual() const {
    double m = 0;
    if (order >= 2)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              m = std::max(m, std::fabs(d2g_at(a, b, i, j) - d2g_at(b, a, i, j)));
    return m;
  }
};

inline JetPoint jet(const MetricFamily& family, const std::vector<double>& x, int order,
                    JetMethod method = JetMethod::analytic, double fd_step = 1e-4) {
  const int n = family.n();
  if (order < 0 || order > 4) throw std::invalid_argument("jet: order in [0,4]");
  JetPoint out;
  out.n = n;
  out.order = order;
  out.x = x;
  const auto sz = [n](int rank) {
    std::size_t s = 1;
    for (int i = 0; i < rank + 2; ++i) s *= static_cast<std::size_t>(n);
    return s;
  };
  out.g.resize(sz(0));
  if (order >= 1) out.dg.resize(sz(1));
  if (order >= 2) out.d2g.resize(sz(2));
  if (order >= 3) out.d3g.resize(sz(3));
  if (order >= 4) out.d4g.resize(sz(4));

  if (method == JetMethod::analytic) {
    const auto jets = family.gram_jets(x, order);
    std::vector<int> alpha(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Jet& jij = jets[static_cast<std::size_t>(i * n + j)];
        out.g[static_cast<std::size_t>(i * n + j)] = jij.value();
        if (order >= 1)
          for (int a = 0; a < n; ++a) {
            std::fill(alpha.begin(), alpha.end(), 0);
            alpha[static_cast<std::size_t>(a)] += 1;
            out.dg[static_cast<std::size_t>((a * n + i) * n + j)] = jij.partial(alpha);
          }
        if (order >= 2)
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
              std::fill(alpha.begin(), alpha.end(), 0);
              alpha[static_cast<std::size_t>(a)] += 1;
              alpha[static_cast<std::size_t>(b)] += 1;
              out.d2g[static_cast<std::size_t>(((a * n + b) * n + i) * n + j)] = jij.partial(alpha);
            }
        if (order >= 3)
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c) {
                std::fill(alpha.begin(), alpha.end(), 0);
                alpha[static_cast<std::size_t>(a)] += 1;
                alpha[static_cast<std::size_t>(b)] += 1;
                alpha[static_cast<std::size_t>(c)] += 1;
                out.d3g[static_cast<std::size_t>((((a * n + b) * n + c) * n + i) * n + j)] = jij.partial(alpha);
              }
        if (order >= 4)
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                  std::fill(alpha.begin(), alpha.end(), 0);
                  alpha[static_cast<std::size_t>(a)] += 1;
                  alpha[static_cast<std::size_t>(b)] += 1;
                  alpha[static_cast<std::size_t>(c)] += 1;
                  alpha[static_cast<std::size_t>(d)] += 1;
                  out.d4g[static_cast<std::size_t>(((((a * n + b) * n + c) * n + d) * n + i) * n + j)] =
                      jij.partial(alpha);
                }
      }
    return out;
  }

  // Nested central differences of the plain evaluator. The chart must leave
  // room for the stencil.
  const double h = fd_step;
  if (!family.chart().contains(x, (order >= 3 ? 5.0 : 2.5) * h))
    throw std::domain_error("jet: finite-difference stencil exits the chart domain");
  auto value = [&family](const std::vector<double>& p) { return family.gram(p); };
  auto shift = [&x](int a, double d) {
    auto p = x;
    p[static_cast<std::size_t>(a)] += d;
    return p;
  };
  out.g = value(x);
  const std::size_t nn = out.g.size();
  auto d1 = [&](auto&& f, int a) {
    const auto plus = f(shift(a, h)), minus = f(shift(a, -h));
    std::vector<double> r(nn);
    for (std::size_t t = 0; t < nn; ++t) r[t] = (plus[t] - minus[t]) / (2 * h);
    return r;
  };
  // First and second derivatives from direct stencils.
  if (order >= 1)
    for (int a = 0; a < n; ++a) {
      const auto da = d1(value, a);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          out.dg[static_cast<std::size_t>((a * n + i) * n + j)] = da[static_cast<std::size_t>(i * n + j)];
    }
  auto second = [&](int a, int b) {
    std::vector<double> r(nn);
    if (a == b) {
      const auto p = value(shift(a, h)), m = value(shift(a, -h));
      for (std::size_t t = 0; t < nn; ++t) r[t] = (p[t] - 2 * out.g[t] + m[t]) / (h * h);
    } else {
      auto pp = x, pm = x, mp = x, mm = x;
      pp[static_cast<std::size_t>(a)] += h;
      pp[static_cast<std::size_t>(b)] += h;
      pm[static_cast<std::size_t>(a)] += h;
      pm[static_cast<std::size_t>(b)] -= h;
      mp[static_cast<std::size_t>(a)] -= h;
      mp[static_cast<std::size_t>(b)] += h;
      mm[static_cast<std::size_t>(a)] -= h;
      mm[static_cast<std::size_t>(b)] -= h;
      const auto vpp = value(pp), vpm = value(pm), vmp = value(mp), vmm = value(mm);
      for (std::size_t t = 0; t < nn; ++t) r[t] = (vpp[t] - vpm[t] - vmp[t] + vmm[t]) / (4 * h * h);
    }
    return r;
  };
  if (order >= 2)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b <= a; ++b) {
        const auto d = second(a, b);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double v = d[static_cast<std::size_t>(i * n + j)];
            out.d2g[static_cast<std::size_t>(((a * n + b) * n + i) * n + j)] = v;
            out.d2g[static_cast<std::size_t>(((b * n + a) * n + i) * n + j)] = v;
          }
      }
  if (order >= 3) {
    // Central difference (step 2h for stability) of the second-order stencil.
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b <= a; ++b) {
          std::vector<double> r(nn);
          {
            auto fp = [&](const std::vector<double>& p) {
              JetPoint jp = jet(family, p, 2, JetMethod::finite_difference, h);
              std::vector<double> d(nn);
              for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                  d[static_cast<std::size_t>(i * n + j)] = jp.d2g_at(a, b, i, j);
              return d;
            };
            const auto plus = fp(shift(c, h)), minus = fp(shift(c, -h));
            for (std::size_t t = 0; t < nn; ++t) r[t] = (plus[t] - minus[t]) / (2 * h);
          }
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              const double v = r[static_cast<std::size_t>(i * n + j)];
              for (const auto& perm : {std::array<int, 3>{a, b, c}, {b, a, c}}) {
                // store under all orderings touched by symmetry of (a,b) x c
                out.d3g[static_cast<std::size_t>((((perm[0] * n + perm[1]) * n + perm[2]) * n + i) * n + j)] = v;
              }
            }
        }
    // Symmetrize fully over the three derivative slots.
    const std::vector<double> raw = out.d3g;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              double acc = 0;
              const std::array<std::array<int, 3>, 6> perms{{{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}};
              for (const auto& p : perms)
                acc += raw[static_cast<std::size_t>((((p[0] * n + p[1]) * n + p[2]) * n + i) * n + j)];
              out.d3g[static_cast<std::size_t>((((a * n + b) * n + c) * n + i) * n + j)] = acc / 6.0;
            }
  }
  if (order >= 4)
    throw std::invalid_argument("jet: finite-difference tables support order <= 3");
  return out;
}

namespace detail {
// Builds jets (order <= 2) from nested central differences of a plain value
// evaluator. Only valid at identity-seeded chart coordinates, which is how
// every caller in this library evaluates fields.
inline std::vector<Jet> fd_jets_from_values(
    const std::function<std::vector<double>(const std::vector<double>&)>& value,
    const std::vector<Jet>& x, double step) {
  const int order = x.front().order();
  if (order > 2) throw std::invalid_argument("finite-difference jets support order <= 2");
  const int n = x.front().space()->nvars;
  std::vector<double> xv(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xv[i] = x[i].value();
  const auto space = x.front().space();
  const auto v0 = value(xv);
  const std::size_t m = v0.size();
  std::vector<Jet> out;
  out.reserve(m);
  std::vector<std::vector<double>> firsts, pures;
  std::vector<std::vector<std::vector<double>>> crosses;
  auto shift = [&xv](int a, double d) {
    auto p = xv;
    p[static_cast<std::size_t>(a)] += d;
    return p;
  };
  if (order >= 1) {
    firsts.resize(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      const auto p = value(shift(a, step)), q = value(shift(a, -step));
      firsts[static_cast<std::size_t>(a)].resize(m);
      for (std::size_t t = 0; t < m; ++t) firsts[static_cast<std::size_t>(a)][t] = (p[t] - q[t]) / (2 * step);
    }
  }
  if (order >= 2) {
    pures.resize(static_cast<std::size_t>(n));
    crosses.assign(static_cast<std::size_t>(n), std::vector<std::vector<double>>(static_cast<std::size_t>(n)));
    for (int a = 0; a < n; ++a) {
      const auto p = value(shift(a, step)), q = value(shift(a, -step));
      pures[static_cast<std::size_t>(a)].resize(m);
      for (std::size_t t = 0; t < m; ++t)
        pures[static_cast<std::size_t>(a)][t] = (p[t] - 2 * v0[t] + q[t]) / (step * step);
      for (int b = 0; b < a; ++b) {
        auto pp = xv, pm = xv, mp = xv, mm = xv;
        pp[static_cast<std::size_t>(a)] += step;
        pp[static_cast<std::size_t>(b)] += step;
        pm[static_cast<std::size_t>(a)] += step;
        pm[static_cast<std::size_t>(b)] -= step;
        mp[static_cast<std::size_t>(a)] -= step;
        mp[static_cast<std::size_t>(b)] += step;
        mm[static_cast<std::size_t>(a)] -= step;
        mm[static_cast<std::size_t>(b)] -= step;
        const auto vpp = value(pp), vpm = value(pm), vmp = value(mp), vmm = value(mm);
        auto& slot = crosses[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        slot.resize(m);
        for (std::size_t t = 0; t < m; ++t)
          slot[t] = (vpp[t] - vpm[t] - vmp[t] + vmm[t]) / (4 * step * step);
      }
    }
  }
  std::vector<int> alpha(static_cast<std::size_t>(n), 0);
  for (std::size_t t = 0; t < m; ++t) {
    std::vector<double> coeffs(space->size(), 0.0);
    coeffs[0] = v0[t];
    if (order >= 1)
      for (int a = 0; a < n; ++a) {
        std::fill(alpha.begin(), alpha.end(), 0);
        alpha[static_cast<std::size_t>(a)] = 1;
        coeffs[static_cast<std::size_t>(space->rank_of(alpha))] = firsts[static_cast<std::size_t>(a)][t];
      }
    if (order >= 2)
      for (int a = 0; a < n; ++a) {
        std::fill(alpha.begin(), alpha.end(), 0);
        alpha[static_cast<std::size_t>(a)] = 2;
        coeffs[static_cast<std::size_t>(space->rank_of(alpha))] = pures[static_cast<std::size_t>(a)][t] / 2.0;
        for (int b = 0; b < a; ++b) {
          std::fill(alpha.begin(), alpha.end(), 0);
          alpha[static_cast<std::size_t>(a)] = 1;
          alpha[static_cast<std::size_t>(b)] = 1;
          coeffs[static_cast<std::size_t>(space->rank_of(alpha))] =
              crosses[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][t];
        }
      }
    out.push_back(Jet::from_coefficients(space, std::move(coeffs)));
  }
  return out;
}
}  // namespace detail

// Wraps a field so that all derivative information comes from nested central
// differences of its plain values; the analytic jets are discarded. This is
// the route for user-supplied component functions and serves as the
// independent finite-difference oracle for the analytic-jet machinery.
inline SymTensorField fd_jet_field(const SymTensorField& f, double step) {
  auto base = f;
  const int n = f.n();
  return SymTensorField(f.name() + "_fd", n, [base, step](const std::vector<Jet>& x) {
    auto value = [&base](const std::vector<double>& p) { return base.eval(p); };
    return detail::fd_jets_from_values(value, x, step);
  });
}

inline MetricFamily fd_jet_family(const MetricFamily& fam, double step) {
  auto base = fam;
  return MetricFamily(fam.name() + "_fd", fam.n(), fam.chart(),
                      [base, step](const std::vector<Jet>& x) {
                        auto value = [&base](const std::vector<double>& p) { return base.gram(p); };
                        return detail::fd_jets_from_values(value, x, step);
                      })
      .with_params(fam.params());
}

// Linearization of the volume element in the direction h: (1/2) tr_g h.
inline double volume_linearization(const MetricFamily& family, const SymTensorField& h,
                                   const std::vector<double>& x) {
  const int n = family.n();
  const auto g = family.gram(x);
  const auto hv = h.eval(x);
  const auto ginv = linalg::inverse(g, n);
  double tr = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      tr += ginv[static_cast<std::size_t>(a * n + b)] * hv[static_cast<std::size_t>(a * n + b)];
  return 0.5 * tr;
}

}  // namespace lovelock::fields
