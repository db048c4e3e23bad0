// Dense exterior-algebra elements over R^k, k <= 12.
//
// A MultiVector of grade p stores its C(k, p) coefficients indexed by
// p-subsets of {0..k-1} in colex (= numeric mask) order.  The scalar type is
// either exact Rat or double; double comparisons go through the global
// tolerance in scalar.hpp.
//
// Decomposability is tracked as a constructed property, not decided
// algorithmically: grades 0 and 1 are always decomposable, and the flag
// propagates through wedge, hodge and interior products, which map
// decomposables to decomposables.

#pragma once

#include "ratnear/numutil.hpp"
#include "ratnear/scalar.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ratnear {

// Diagnostic hook: when set, hodge() flips the sign it returns on odd-grade
// inputs, letting the invariant suite prove it can detect a broken duality.
// Leave false everywhere outside that diagnostic.
namespace selfcheck {
inline bool flip_hodge_sign = false;
}

template <class S>
class MultiVector {
 public:
  MultiVector() : k_(1), p_(0), c_(1, S(0)), decomposable_(true) {}

  static MultiVector zero(int k, int p) {
    check_kp(k, p);
    MultiVector m;
    m.k_ = k;
    m.p_ = p;
    m.c_.assign(static_cast<size_t>(binomial(k, p)), S(0));
    m.decomposable_ = true;
    return m;
  }

  static MultiVector scalar(int k, S value) {
    MultiVector m = zero(k, 0);
    m.c_[0] = std::move(value);
    return m;
  }

  static MultiVector vector(int k, std::vector<S> coords) {
    if (static_cast<int>(coords.size()) != k)
      throw std::invalid_argument("vector coordinate count != dimension");
    MultiVector m = zero(k, 1);
    m.c_ = std::move(coords);
    return m;
  }

  static MultiVector basis_vector(int k, int i) {
    MultiVector m = zero(k, 1);
    m.c_.at(i) = S(1);
    return m;
  }

  static MultiVector basis_blade(int k, std::uint32_t mask) {
    int p = __builtin_popcount(mask);
    MultiVector m = zero(k, p);
    m.c_[subset_index(mask)] = S(1);
    return m;
  }

  // General coefficient list in colex mask order.  Not flagged decomposable
  // unless the grade forces it.
  static MultiVector from_coefficients(int k, int p, std::vector<S> coeffs) {
    check_kp(k, p);
    if (coeffs.size() != static_cast<size_t>(binomial(k, p)))
      throw std::invalid_argument("coefficient count != C(k, p)");
    MultiVector m;
    m.k_ = k;
    m.p_ = p;
    m.c_ = std::move(coeffs);
    m.decomposable_ = (p <= 1);
    return m;
  }

  int dim() const { return k_; }
  int grade() const { return p_; }
  bool decomposable() const { return decomposable_; }
  const std::vector<S>& coefficients() const { return c_; }

  const S& coeff(std::uint32_t mask) const { return c_[subset_index(mask)]; }
  S& coeff_ref(std::uint32_t mask) { return c_[subset_index(mask)]; }

  bool is_zero() const {
    for (const S& v : c_)
      if (!scalar_traits<S>::is_zero(v)) return false;
    return true;
  }

  MultiVector operator-() const {
    MultiVector m = *this;
    for (S& v : m.c_) v = -v;
    return m;
  }

  MultiVector& operator*=(const S& s) {
    for (S& v : c_) v = v * s;
    return *this;
  }
  friend MultiVector operator*(MultiVector m, const S& s) { return m *= s; }
  friend MultiVector operator*(const S& s, MultiVector m) { return m *= s; }

  MultiVector& operator/=(const S& s) {
    for (S& v : c_) v = v / s;
    return *this;
  }

  friend MultiVector operator+(const MultiVector& a, const MultiVector& b) {
    return combined(a, b, +1);
  }
  friend MultiVector operator-(const MultiVector& a, const MultiVector& b) {
    return combined(a, b, -1);
  }

  // Equality up to the scalar mode's zero test.  The zero element compares
  // equal across grades.
  friend bool operator==(const MultiVector& a, const MultiVector& b) {
    if (a.k_ != b.k_) return false;
    if (a.p_ != b.p_) return a.is_zero() && b.is_zero();
    for (size_t i = 0; i < a.c_.size(); ++i)
      if (!scalar_traits<S>::is_zero(a.c_[i] - b.c_[i])) return false;
    return true;
  }
  friend bool operator!=(const MultiVector& a, const MultiVector& b) { return !(a == b); }

  void mark_decomposable(bool flag) { decomposable_ = flag || p_ <= 1; }

 private:
  static void check_kp(int k, int p) {
    if (k < 1 || k > kMaxDim) throw std::invalid_argument("dimension out of range");
    if (p < 0 || p > k) throw std::invalid_argument("grade out of range");
  }

  static MultiVector combined(const MultiVector& a, const MultiVector& b, int sgn) {
    if (a.k_ != b.k_) throw std::invalid_argument("dimension mismatch");
    if (a.p_ != b.p_) {
      // Adding across grades is only meaningful when one side is zero.
      if (a.is_zero()) return sgn > 0 ? b : -b;
      if (b.is_zero()) return a;
      throw std::invalid_argument("grade mismatch");
    }
    MultiVector m = a;
    for (size_t i = 0; i < m.c_.size(); ++i)
      m.c_[i] = m.c_[i] + (sgn > 0 ? b.c_[i] : S(-b.c_[i]));
    m.decomposable_ = m.p_ <= 1 || (a.is_zero() && b.decomposable_) ||
                      (b.is_zero() && a.decomposable_);
    return m;
  }

  int k_;
  int p_;
  std::vector<S> c_;
  bool decomposable_;
};

// u ^ v, grade p+q.  Rejects p+q > k.
template <class S>
MultiVector<S> wedge(const MultiVector<S>& u, const MultiVector<S>& v) {
  if (u.dim() != v.dim()) throw std::invalid_argument("dimension mismatch");
  const int k = u.dim(), p = u.grade(), q = v.grade();
  if (p + q > k) throw std::invalid_argument("wedge grade exceeds dimension");
  auto out = MultiVector<S>::zero(k, p + q);
  const auto& pm = subset_masks(k, p);
  const auto& qm = subset_masks(k, q);
  for (size_t i = 0; i < pm.size(); ++i) {
    const S& ui = u.coefficients()[i];
    if (scalar_traits<S>::is_zero(ui)) continue;
    for (size_t j = 0; j < qm.size(); ++j) {
      if (pm[i] & qm[j]) continue;
      const S& vj = v.coefficients()[j];
      if (scalar_traits<S>::is_zero(vj)) continue;
      S term = ui * vj;
      if (merge_sign(pm[i], qm[j]) < 0) term = -term;
      out.coeff_ref(pm[i] | qm[j]) = out.coeff(pm[i] | qm[j]) + term;
    }
  }
  out.mark_decomposable(u.decomposable() && v.decomposable());
  return out;
}

// Euclidean inner product of same-grade elements; on decomposables this is
// the Gram determinant of the defining vectors.
template <class S>
S inner(const MultiVector<S>& u, const MultiVector<S>& v) {
  if (u.dim() != v.dim() || u.grade() != v.grade())
    throw std::invalid_argument("inner product needs matching dimension and grade");
  S acc(0);
  for (size_t i = 0; i < u.coefficients().size(); ++i)
    acc = acc + u.coefficients()[i] * v.coefficients()[i];
  return acc;
}

template <class S>
S norm_sq(const MultiVector<S>& u) {
  return inner(u, u);
}

template <class S>
double norm(const MultiVector<S>& u) {
  return std::sqrt(scalar_traits<S>::to_double(norm_sq(u)));
}

// Interior product u . v for grade(u) >= grade(v), defined by
// <u . v, x> = <u, v ^ x> for every x of grade p - q.  Coordinatewise,
// (u . v)[K] = sum over q-subsets J disjoint from K of sign(J, K) v[J] u[J|K].
template <class S>
MultiVector<S> interior(const MultiVector<S>& u, const MultiVector<S>& v) {
  if (u.dim() != v.dim()) throw std::invalid_argument("dimension mismatch");
  const int k = u.dim(), p = u.grade(), q = v.grade();
  if (p < q) throw std::invalid_argument("interior product needs grade(u) >= grade(v)");
  auto out = MultiVector<S>::zero(k, p - q);
  const auto& km = subset_masks(k, p - q);
  const auto& jm = subset_masks(k, q);
  for (size_t a = 0; a < km.size(); ++a) {
    S acc(0);
    for (size_t b = 0; b < jm.size(); ++b) {
      if (km[a] & jm[b]) continue;
      const S& vj = v.coefficients()[b];
      if (scalar_traits<S>::is_zero(vj)) continue;
      S term = vj * u.coeff(jm[b] | km[a]);
      if (merge_sign(jm[b], km[a]) < 0) term = -term;
      acc = acc + term;
    }
    out.coeff_ref(km[a]) = acc;
  }
  out.mark_decomposable(u.decomposable() && v.decomposable());
  return out;
}

// Orthogonal complement u^perp, grade k - p: the unique element with
// v ^ u^perp = <v, u> e_{0..k-1} for every grade-p v.
template <class S>
MultiVector<S> hodge(const MultiVector<S>& u) {
  const int k = u.dim(), p = u.grade();
  const std::uint32_t full = (k == 32) ? ~0u : ((1u << k) - 1);
  auto out = MultiVector<S>::zero(k, k - p);
  const auto& km = subset_masks(k, k - p);
  for (size_t a = 0; a < km.size(); ++a) {
    std::uint32_t comp = full & ~km[a];
    S term = u.coeff(comp);
    if (merge_sign(comp, km[a]) < 0) term = -term;
    out.coeff_ref(km[a]) = term;
  }
  out.mark_decomposable(u.decomposable());
  if (selfcheck::flip_hodge_sign && p % 2 == 1) return -out;
  return out;
}

// Orthogonal projection of u onto the subspace spanned by the decomposable
// element v (grade(v) >= grade(u)).  Uses |v|^2 proj(u) = +- v . (v . u) and
// resolves the sign per call: the true projection w satisfies
// <w, u> = |w|^2 >= 0.
template <class S>
MultiVector<S> project(const MultiVector<S>& v, const MultiVector<S>& u) {
  if (!v.decomposable())
    throw std::invalid_argument("projection target must be decomposable");
  MultiVector<S> w = interior(v, interior(v, u));
  S vv = norm_sq(v);
  if (scalar_traits<S>::is_zero(vv))
    throw std::invalid_argument("projection onto zero element");
  w /= vv;
  S align = inner(w, u);
  if (align < S(0)) w = -w;
  return w;
}

// Projective distance |x ^ y| / (|x| |y|) between the lines through two
// nonzero vectors.
template <class S>
double projective_distance(const MultiVector<S>& x, const MultiVector<S>& y) {
  if (x.grade() != 1 || y.grade() != 1)
    throw std::invalid_argument("projective distance is between vectors");
  double nx = norm(x), ny = norm(y);
  if (nx == 0 || ny == 0) throw std::invalid_argument("projective distance of zero vector");
  return norm(wedge(x, y)) / (nx * ny);
}

// Whether the vector x lies in the span of the decomposable element w.
// Exact scalars test w ^ x == 0; doubles use |w ^ x| <= tol |w| |x|.
template <class S>
bool span_membership(const MultiVector<S>& w, const MultiVector<S>& x,
                     double tol = comparison_tolerance()) {
  if (x.grade() != 1) throw std::invalid_argument("span membership is for vectors");
  if (!w.decomposable()) throw std::invalid_argument("span target must be decomposable");
  MultiVector<S> wx = wedge(w, x);
  if constexpr (scalar_traits<S>::is_exact) {
    (void)tol;
    return wx.is_zero();
  } else {
    return norm(wx) <= tol * norm(w) * norm(x);
  }
}

// Wedge of a list of vectors; the empty product is the unit scalar.
template <class S>
MultiVector<S> from_vectors(int k, const std::vector<std::vector<S>>& vecs) {
  MultiVector<S> acc = MultiVector<S>::scalar(k, S(1));
  for (const auto& v : vecs) acc = wedge(acc, MultiVector<S>::vector(k, v));
  return acc;
}

template <class S>
MultiVector<double> to_double_mv(const MultiVector<S>& u) {
  std::vector<double> c(u.coefficients().size());
  for (size_t i = 0; i < c.size(); ++i)
    c[i] = scalar_traits<S>::to_double(u.coefficients()[i]);
  auto out = MultiVector<double>::from_coefficients(u.dim(), u.grade(), std::move(c));
  out.mark_decomposable(u.decomposable());
  return out;
}

}  // namespace ratnear
