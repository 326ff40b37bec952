// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lovelock/combinatorics.hpp"
#include "lovelock/rational.hpp"

namespace lovelock::forms {

// An element of the bigraded algebra Omega^{p,q} at a point: a bilinear form
// on Lambda^p x Lambda^q, antisymmetric separately in each factor. Only the
// components on strictly increasing multi-indices are stored (lexicographic
// order, row-major over the (I, J) pair); everything else follows by sign.
//
// The scalar S is either double (numeric work) or Rational (exact identity
// checks). A bi-degree exceeding the ambient dimension yields the legitimate
// zero form with an empty component array.
template <class S>
class DoubleForm {
 public:
  DoubleForm() = default;
  DoubleForm(int n, int p, int q)
      : n_(n), p_(p), q_(q), dim_i_(binomial(n, p)), dim_j_(binomial(n, q)) {
    if (n < 0 || p < 0 || q < 0) throw std::invalid_argument("DoubleForm: negative degree");
    comps_.assign(static_cast<std::size_t>(dim_i_ * dim_j_), S{});
  }

  static DoubleForm scalar(int n, S value) {
    DoubleForm f(n, 0, 0);
    f.comps_[0] = value;
    return f;
  }

  int n() const { return n_; }
  int p() const { return p_; }
  int q() const { return q_; }
  std::int64_t rows() const { return dim_i_; }
  std::int64_t cols() const { return dim_j_; }
  bool degree_overflow() const { return p_ > n_ || q_ > n_; }

  const std::vector<S>& components() const { return comps_; }
  std::vector<S>& components() { return comps_; }

  S& at(std::int64_t i_rank, std::int64_t j_rank) {
    return comps_[static_cast<std::size_t>(i_rank * dim_j_ + j_rank)];
  }
  const S& at(std::int64_t i_rank, std::int64_t j_rank) const {
    return comps_[static_cast<std::size_t>(i_rank * dim_j_ + j_rank)];
  }

  // Signed access for arbitrary (not necessarily increasing) index tuples.
  S get(MultiIndex I, MultiIndex J) const {
    if (static_cast<int>(I.size()) != p_ || static_cast<int>(J.size()) != q_)
      throw std::invalid_argument("DoubleForm::get: wrong index lengths");
    const int si = canonicalize(I);
    if (si == 0) return S{};
    const int sj = canonicalize(J);
    if (sj == 0) return S{};
    const S v = at(subset_rank(n_, I), subset_rank(n_, J));
    return (si * sj > 0) ? v : -v;
  }

  void set(const MultiIndex& I, const MultiIndex& J, S v) { at(subset_rank(n_, I), subset_rank(n_, J)) = v; }

  bool is_zero() const {
    for (const auto& c : comps_)
      if (!ScalarOps<S>::is_zero(c)) return false;
    return true;
  }

  double max_abs() const {
    double m = 0;
    for (const auto& c : comps_) {
      const double v = std::fabs(ScalarOps<S>::to_double(c));
      if (v > m) m = v;
    }
    return m;
  }

  double frobenius() const {
    double s = 0;
    for (const auto& c : comps_) {
      const double v = ScalarOps<S>::to_double(c);
      s += v * v;
    }
    return std::sqrt(s);
  }

  DoubleForm& operator+=(const DoubleForm& o) {
    check_same(o);
    for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += o.comps_[i];
    return *this;
  }
  DoubleForm& operator-=(const DoubleForm& o) {
    check_same(o);
    for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] -= o.comps_[i];
    return *this;
  }
  DoubleForm& operator*=(const S& s) {
    for (auto& c : comps_) c *= s;
    return *this;
  }
  friend DoubleForm operator+(DoubleForm a, const DoubleForm& b) { return a += b; }
  friend DoubleForm operator-(DoubleForm a, const DoubleForm& b) { return a -= b; }
  friend DoubleForm operator*(DoubleForm a, const S& s) { return a *= s; }
  friend DoubleForm operator*(const S& s, DoubleForm a) { return a *= s; }

  // Debug dump: one "(I | J) -> value" line per stored component.
  std::string dump() const {
    std::ostringstream os;
    const auto Is = all_subsets(n_, p_);
    const auto Js = all_subsets(n_, q_);
    for (std::size_t a = 0; a < Is.size(); ++a)
      for (std::size_t b = 0; b < Js.size(); ++b) {
        os << "(";
        for (std::size_t t = 0; t < Is[a].size(); ++t) os << (t ? "," : "") << Is[a][t];
        os << " | ";
        for (std::size_t t = 0; t < Js[b].size(); ++t) os << (t ? "," : "") << Js[b][t];
        os << ") -> " << ScalarOps<S>::to_double(at(a, b)) << "\n";
      }
    return os.str();
  }

 private:
  void check_same(const DoubleForm& o) const {
    if (n_ != o.n_ || p_ != o.p_ || q_ != o.q_)
      throw std::invalid_argument("DoubleForm: degree/dimension mismatch");
  }

  int n_ = 0, p_ = 0, q_ = 0;
  std::int64_t dim_i_ = 1, dim_j_ = 1;
  std::vector<S> comps_;
};

// The metric as a (1,1)-form in an orthonormal frame: the identity matrix.
template <class S>
DoubleForm<S> metric_identity(int n) {
  if (n < 1) throw std::invalid_argument("metric_identity: n must be >= 1");
  DoubleForm<S> g(n, 1, 1);
  for (int i = 0; i < n; ++i) g.at(i, i) = ScalarOps<S>::from_int(1);
  return g;
}

// Product of double forms: the double shuffle sum with unit coefficients.
// Bi-degrees add; the result is the zero form once a degree exceeds n.
template <class S>
DoubleForm<S> mul(const DoubleForm<S>& a, const DoubleForm<S>& b) {
  if (a.n() != b.n()) throw std::invalid_argument("mul: dimension mismatch");
  const int n = a.n();
  DoubleForm<S> out(n, a.p() + b.p(), a.q() + b.q());
  if (out.degree_overflow() || a.degree_overflow() || b.degree_overflow()) return out;
  const auto Is = all_subsets(n, out.p());
  const auto Js = all_subsets(n, out.q());
  for (std::size_t ia = 0; ia < Is.size(); ++ia) {
    const auto isplits = all_splits(Is[ia], a.p());
    for (std::size_t jb = 0; jb < Js.size(); ++jb) {
      const auto jsplits = all_splits(Js[jb], a.q());
      S acc{};
      for (const auto& si : isplits) {
        const std::int64_t ra1 = subset_rank(n, si.head);
        const std::int64_t ra2 = subset_rank(n, si.tail);
        for (const auto& sj : jsplits) {
          const S term = a.at(ra1, subset_rank(n, sj.head)) * b.at(ra2, subset_rank(n, sj.tail));
          if (si.sign * sj.sign > 0)
            acc += term;
          else
            acc -= term;
        }
      }
      out.at(static_cast<std::int64_t>(ia), static_cast<std::int64_t>(jb)) = acc;
    }
  }
  return out;
}

template <class S>
DoubleForm<S> power(const DoubleForm<S>& w, int k) {
  if (k < 0) throw std::invalid_argument("power: negative exponent");
  DoubleForm<S> acc = DoubleForm<S>::scalar(w.n(), ScalarOps<S>::from_int(1));
  for (int i = 0; i < k; ++i) acc = mul(acc, w);
  return acc;
}

// Contraction in an orthonormal frame: sums the common first slot of both
// factors. Degenerate degrees contract to the zero form so the operator can
// be iterated blindly.
template <class S>
DoubleForm<S> contract(const DoubleForm<S>& w) {
  const int n = w.n();
  if (w.p() == 0 || w.q() == 0) return DoubleForm<S>(n, 0, 0);
  DoubleForm<S> out(n, w.p() - 1, w.q() - 1);
  if (w.degree_overflow()) return out;
  const auto Is = all_subsets(n, out.p());
  const auto Js = all_subsets(n, out.q());
  MultiIndex bi, bj;
  for (std::size_t ia = 0; ia < Is.size(); ++ia)
    for (std::size_t jb = 0; jb < Js.size(); ++jb) {
      S acc{};
      for (int i = 0; i < n; ++i) {
        const int si = insert_front(Is[ia], i, bi);
        if (si == 0) continue;
        const int sj = insert_front(Js[jb], i, bj);
        if (sj == 0) continue;
        const S v = w.at(subset_rank(n, bi), subset_rank(n, bj));
        if (si * sj > 0)
          acc += v;
        else
          acc -= v;
      }
      out.at(static_cast<std::int64_t>(ia), static_cast<std::int64_t>(jb)) = acc;
    }
  return out;
}

template <class S>
DoubleForm<S> contract_iterated(DoubleForm<S> w, int times) {
  for (int i = 0; i < times; ++i) w = contract(w);
  return w;
}

// Contraction against an arbitrary-basis metric: the common slot is traced
// with the inverse Gram matrix instead of the Kronecker delta.
template <class S>
DoubleForm<S> contract_with_inverse(const DoubleForm<S>& w, const std::vector<S>& gram_inv) {
  const int n = w.n();
  if (static_cast<int>(gram_inv.size()) != n * n)
    throw std::invalid_argument("contract_with_inverse: bad inverse size");
  if (w.p() == 0 || w.q() == 0) return DoubleForm<S>(n, 0, 0);
  DoubleForm<S> out(n, w.p() - 1, w.q() - 1);
  if (w.degree_overflow()) return out;
  const auto Is = all_subsets(n, out.p());
  const auto Js = all_subsets(n, out.q());
  MultiIndex bi, bj;
  for (std::size_t ia = 0; ia < Is.size(); ++ia)
    for (std::size_t jb = 0; jb < Js.size(); ++jb) {
      S acc{};
      for (int a = 0; a < n; ++a) {
        const int si = insert_front(Is[ia], a, bi);
        if (si == 0) continue;
        const std::int64_t ri = subset_rank(n, bi);
        for (int b = 0; b < n; ++b) {
          const S& weight = gram_inv[static_cast<std::size_t>(a * n + b)];
          if (ScalarOps<S>::is_zero(weight)) continue;
          const int sj = insert_front(Js[jb], b, bj);
          if (sj == 0) continue;
          const S v = w.at(ri, subset_rank(n, bj)) * weight;
          if (si * sj > 0)
            acc += v;
          else
            acc -= v;
        }
      }
      out.at(static_cast<std::int64_t>(ia), static_cast<std::int64_t>(jb)) = acc;
    }
  return out;
}

// Natural inner product: the increasing-multi-index components form an
// orthonormal basis, so this is a plain dot product.
template <class S>
S inner(const DoubleForm<S>& a, const DoubleForm<S>& b) {
  if (a.n() != b.n() || a.p() != b.p() || a.q() != b.q())
    throw std::invalid_argument("inner: degree mismatch");
  S acc{};
  for (std::size_t i = 0; i < a.components().size(); ++i)
    acc += a.components()[i] * b.components()[i];
  return acc;
}

// Symmetrization over the factor swap; defined for p == q.
template <class S>
DoubleForm<S> sym_project(const DoubleForm<S>& w) {
  if (w.p() != w.q()) throw std::invalid_argument("sym_project: p != q");
  DoubleForm<S> out = w;
  const S half = ScalarOps<S>::from_ratio(1, 2);
  for (std::int64_t i = 0; i < w.rows(); ++i)
    for (std::int64_t j = 0; j < w.cols(); ++j) out.at(i, j) = (w.at(i, j) + w.at(j, i)) * half;
  return out;
}

// Max deviation from the factor-swap symmetry, as a double.
template <class S>
double symmetry_residual(const DoubleForm<S>& w) {
  if (w.p() != w.q()) throw std::invalid_argument("symmetry_residual: p != q");
  double m = 0;
  for (std::int64_t i = 0; i < w.rows(); ++i)
    for (std::int64_t j = 0; j < w.cols(); ++j) {
      const double d =
          ScalarOps<S>::to_double(w.at(i, j)) - ScalarOps<S>::to_double(w.at(j, i));
      m = std::max(m, std::fabs(d));
    }
  return m;
}

// A (p,p)-form together with a validated factor-swap symmetry.
template <class S>
class SymDoubleForm {
 public:
  static SymDoubleForm validate(DoubleForm<S> w, double tol = 0.0) {
    if (symmetry_residual(w) > tol) throw std::invalid_argument("SymDoubleForm: not symmetric");
    return SymDoubleForm(std::move(w));
  }
  const DoubleForm<S>& form() const { return form_; }

 private:
  explicit SymDoubleForm(DoubleForm<S> w) : form_(std::move(w)) {}
  DoubleForm<S> form_;
};

// Multiplication by the metric (1,1)-identity.
template <class S>
DoubleForm<S> mul_metric(const DoubleForm<S>& w) {
  return mul(metric_identity<S>(w.n()), w);
}

// Left-hand side minus right-hand side of the contraction/metric-power
// commutation identity
//   (1/m!) c^l g^m w  =  (1/m!) g^m c^l w
//     + sum_{r=1}^{min(l,m)} C(l,r) prod_{i=0}^{r-1} (n-p-q+l-m-i)
//       g^{m-r}/(m-r)! c^{l-r} w .
// The residual is identically zero; returned for testing.
template <class S>
DoubleForm<S> commutation_residual(const DoubleForm<S>& w, int l, int m) {
  if (l < 0 || m < 0) throw std::invalid_argument("commutation_residual: l,m >= 0");
  const int n = w.n();
  const int p = w.p(), q = w.q();
  // Every term of the identity lands in bi-degree (p+m-l, q+m-l); a negative
  // target means both sides have been contracted away entirely.
  const int tp = p + m - l, tq = q + m - l;
  if (tp < 0 || tq < 0) return DoubleForm<S>(n, 0, 0);
  const DoubleForm<S> g = metric_identity<S>(n);
  const S inv_mfact = ScalarOps<S>::from_ratio(1, factorial(m));

  DoubleForm<S> lhs = contract_iterated(mul(power(g, m), w), l) * inv_mfact;

  DoubleForm<S> rhs(n, tp, tq);
  if (l <= p && l <= q) rhs += mul(power(g, m), contract_iterated(w, l)) * inv_mfact;
  const int rmax = std::min(l, m);
  for (int r = 1; r <= rmax; ++r) {
    if (l - r > p || l - r > q) continue;  // that many contractions annihilate w
    S coeff = ScalarOps<S>::from_int(binomial(l, r));
    for (int i = 0; i < r; ++i) coeff *= ScalarOps<S>::from_int(n - p - q + l - m - i);
    coeff *= ScalarOps<S>::from_ratio(1, factorial(m - r));
    rhs += mul(power(g, m - r), contract_iterated(w, l - r)) * coeff;
  }
  return lhs - rhs;
}

// Change of frame on both factors. Columns of M are the new basis vectors in
// old-basis components; entries of the transformed form are sums of products
// of p x p and q x q minors against the old components.
inline double minor_det(const std::vector<double>& M, int n, const MultiIndex& rows,
                        const MultiIndex& cols) {
  const int k = static_cast<int>(rows.size());
  if (k == 0) return 1.0;
  if (k == 1) return M[static_cast<std::size_t>(rows[0] * n + cols[0])];
  if (k == 2) {
    const double a = M[static_cast<std::size_t>(rows[0] * n + cols[0])];
    const double b = M[static_cast<std::size_t>(rows[0] * n + cols[1])];
    const double c = M[static_cast<std::size_t>(rows[1] * n + cols[0])];
    const double d = M[static_cast<std::size_t>(rows[1] * n + cols[1])];
    return a * d - b * c;
  }
  // Laplace expansion along the first row; k <= 4 in practice.
  double acc = 0;
  MultiIndex sub_rows(rows.begin() + 1, rows.end());
  for (int t = 0; t < k; ++t) {
    MultiIndex sub_cols;
    sub_cols.reserve(k - 1);
    for (int s = 0; s < k; ++s)
      if (s != t) sub_cols.push_back(cols[s]);
    const double piv = M[static_cast<std::size_t>(rows[0] * n + cols[t])];
    if (piv != 0.0) acc += ((t % 2 == 0) ? piv : -piv) * minor_det(M, n, sub_rows, sub_cols);
  }
  return acc;
}

inline DoubleForm<double> transform(const DoubleForm<double>& w, const std::vector<double>& M) {
  const int n = w.n();
  if (static_cast<int>(M.size()) != n * n) throw std::invalid_argument("transform: bad matrix");
  DoubleForm<double> out(n, w.p(), w.q());
  if (w.degree_overflow()) return out;
  const auto Is = all_subsets(n, w.p());
  const auto Js = all_subsets(n, w.q());
  // Precompute the two minor matrices.
  std::vector<double> mi(Is.size() * Is.size()), mj(Js.size() * Js.size());
  for (std::size_t a = 0; a < Is.size(); ++a)
    for (std::size_t b = 0; b < Is.size(); ++b) mi[a * Is.size() + b] = minor_det(M, n, Is[a], Is[b]);
  if (w.p() == w.q()) {
    mj = mi;
  } else {
    for (std::size_t a = 0; a < Js.size(); ++a)
      for (std::size_t b = 0; b < Js.size(); ++b) mj[a * Js.size() + b] = minor_det(M, n, Js[a], Js[b]);
  }
  for (std::size_t ia = 0; ia < Is.size(); ++ia)
    for (std::size_t jb = 0; jb < Js.size(); ++jb) {
      double acc = 0;
      for (std::size_t ka = 0; ka < Is.size(); ++ka) {
        const double wi = mi[ka * Is.size() + ia];
        if (wi == 0.0) continue;
        for (std::size_t lb = 0; lb < Js.size(); ++lb) {
          const double wj = mj[lb * Js.size() + jb];
          if (wj == 0.0) continue;
          acc += wi * wj * w.at(static_cast<std::int64_t>(ka), static_cast<std::int64_t>(lb));
        }
      }
      out.at(static_cast<std::int64_t>(ia), static_cast<std::int64_t>(jb)) = acc;
    }
  return out;
}

// Orthonormal-frame data for a metric Gram matrix at a point.
struct GramFrame {
  int n = 0;
  std::vector<double> gram;   // g_ij, chart basis
  std::vector<double> frame;  // columns are orthonormal vectors in chart components

  // Max deviation of frame^T gram frame from the identity.
  double orthonormality_residual() const {
    double m = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double acc = 0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            acc += frame[static_cast<std::size_t>(i * n + a)] * gram[static_cast<std::size_t>(i * n + j)] *
                   frame[static_cast<std::size_t>(j * n + b)];
        m = std::max(m, std::fabs(acc - (a == b ? 1.0 : 0.0)));
      }
    return m;
  }
};

}  // namespace lovelock::forms
