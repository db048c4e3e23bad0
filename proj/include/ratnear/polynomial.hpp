// Univariate polynomial arithmetic, exact over Rat.
//
// Coefficients are stored ascending by degree and trailing zeros are
// trimmed, so degree() is canonical for exact scalars.  This backs the
// polynomial manifold models and the symbolic curve machinery.

#pragma once

#include "ratnear/scalar.hpp"

#include <stdexcept>
#include <vector>

namespace ratnear {

template <class S>
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<S> ascending) : c_(std::move(ascending)) { trim(); }

  static Polynomial constant(S v) { return Polynomial(std::vector<S>{std::move(v)}); }
  static Polynomial monomial(int deg, S v = S(1)) {
    if (deg < 0) throw std::invalid_argument("negative degree");
    std::vector<S> c(deg + 1, S(0));
    c[deg] = std::move(v);
    return Polynomial(std::move(c));
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<S>& coefficients() const { return c_; }
  S coefficient(int deg) const {
    return (deg >= 0 && deg < static_cast<int>(c_.size())) ? c_[deg] : S(0);
  }

  S eval(const S& x) const {
    S acc(0);
    for (size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
    return acc;
  }

  double eval_double(double x) const {
    double acc = 0;
    for (size_t i = c_.size(); i-- > 0;)
      acc = acc * x + scalar_traits<S>::to_double(c_[i]);
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial();
    std::vector<S> d(c_.size() - 1);
    for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * S(static_cast<long>(i));
    return Polynomial(std::move(d));
  }

  Polynomial derivative(int order) const {
    Polynomial p = *this;
    for (int i = 0; i < order; ++i) p = p.derivative();
    return p;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<S> c(std::max(a.c_.size(), b.c_.size()), S(0));
    for (size_t i = 0; i < a.c_.size(); ++i) c[i] = c[i] + a.c_[i];
    for (size_t i = 0; i < b.c_.size(); ++i) c[i] = c[i] + b.c_[i];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<S> c(std::max(a.c_.size(), b.c_.size()), S(0));
    for (size_t i = 0; i < a.c_.size(); ++i) c[i] = c[i] + a.c_[i];
    for (size_t i = 0; i < b.c_.size(); ++i) c[i] = c[i] - b.c_[i];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return Polynomial();
    std::vector<S> c(a.c_.size() + b.c_.size() - 1, S(0));
    for (size_t i = 0; i < a.c_.size(); ++i)
      for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] = c[i + j] + a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator*(const S& s, const Polynomial& p) {
    std::vector<S> c = p.c_;
    for (S& v : c) v = v * s;
    return Polynomial(std::move(c));
  }

  friend Polynomial operator-(const Polynomial& p) { return S(-1) * p; }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return (a - b).is_zero();
  }

 private:
  void trim() {
    while (!c_.empty() && scalar_traits<S>::is_zero(c_.back())) c_.pop_back();
  }

  std::vector<S> c_;
};

}  // namespace ratnear
