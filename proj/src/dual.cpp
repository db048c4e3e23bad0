#include "ratnear/dual.hpp"

#include "ratnear/numutil.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ratnear {

namespace {

Polynomial<Rat> poly_det(const std::vector<std::vector<Polynomial<Rat>>>& m) {
  const int k = static_cast<int>(m.size());
  if (k == 1) return m[0][0];
  Polynomial<Rat> acc;
  for (int i = 0; i < k; ++i) {
    if (m[i][0].is_zero()) continue;
    std::vector<std::vector<Polynomial<Rat>>> sub;
    sub.reserve(k - 1);
    for (int r = 0; r < k; ++r) {
      if (r == i) continue;
      sub.emplace_back(m[r].begin() + 1, m[r].end());
    }
    Polynomial<Rat> term = m[i][0] * poly_det(sub);
    acc = (i % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

Rat rat_det(std::vector<std::vector<Rat>> m) {
  const int k = static_cast<int>(m.size());
  Rat det(1);
  for (int c = 0; c < k; ++c) {
    int piv = -1;
    for (int r = c; r < k && piv < 0; ++r)
      if (!scalar_traits<Rat>::is_zero(m[r][c])) piv = r;
    if (piv < 0) return Rat(0);
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (int r = c + 1; r < k; ++r) {
      Rat f = m[r][c] / m[c][c];
      for (int j = c; j < k; ++j) m[r][j] -= f * m[c][j];
    }
  }
  return det;
}

double dbl_det(std::vector<std::vector<double>> m) {
  const int k = static_cast<int>(m.size());
  double det = 1;
  for (int c = 0; c < k; ++c) {
    int piv = c;
    for (int r = c + 1; r < k; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    if (m[piv][c] == 0) return 0;
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (int r = c + 1; r < k; ++r) {
      double f = m[r][c] / m[c][c];
      for (int j = c; j < k; ++j) m[r][j] -= f * m[c][j];
    }
  }
  return det;
}

// Fornberg recursion: weights of the m-th derivative at zero from the
// nodes x[0..N].  Returns one weight per node.
std::vector<double> fd_weights(int m, const std::vector<double>& x) {
  const int N = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> C(N + 1, std::vector<double>(m + 1, 0.0));
  C[0][0] = 1;
  double c1 = 1, c4 = x[0];
  for (int i = 1; i <= N; ++i) {
    int mn = std::min(i, m);
    double c2 = 1, c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          C[i][k] = c1 * (k * C[i - 1][k - 1] - c5 * C[i - 1][k]) / c2;
        C[i][0] = -c1 * c5 * C[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        C[j][k] = (c4 * C[j][k] - k * C[j][k - 1]) / c3;
      C[j][0] = c4 * C[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(N + 1);
  for (int i = 0; i <= N; ++i) w[i] = C[i][m];
  return w;
}

double euclid(const std::vector<double>& v) {
  double s = 0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

}  // namespace

std::vector<double> DualCurve::y_jet(double x, int order) const {
  std::vector<double> y(n_ + 1, 0.0);
  if (symbolic_) {
    for (int c = 0; c <= n_; ++c) y[c] = yp_[c].derivative(order).eval_double(x);
    return y;
  }
  if (order == 0) {
    y[0] = 1;
    y[1] = x;
  } else if (order == 1) {
    y[1] = 1;
  }
  for (int l = 0; l < n_ - 1; ++l)
    y[2 + l] = mf_->curve_derivative(l, order, x);
  return y;
}

std::vector<double> DualCurve::z(double x, int order) const {
  if (symbolic_) {
    std::vector<double> v(n_ + 1);
    for (int c = 0; c <= n_; ++c) v[c] = zp_[c].derivative(order).eval_double(x);
    return v;
  }
  if (order == 0) {
    std::vector<std::vector<double>> rows;
    rows.reserve(n_);
    for (int i = 0; i < n_; ++i) rows.push_back(y_jet(x, i));
    return hodge(from_vectors(n_ + 1, rows)).coefficients();
  }

  // Central differences on the minimal symmetric stencil, extrapolated
  // through five halvings; the error series is even in the width.
  const int p = (order + 1) / 2;
  const double h0 = 0.02 * (1 + std::fabs(x));
  std::vector<std::vector<std::vector<double>>> vals(5);  // [width][node] -> z
  for (int k = 0; k < 5; ++k) {
    double h = h0 / (1 << k);
    for (int i = -p; i <= p; ++i) vals[k].push_back(z(x + i * h, 0));
  }
  std::vector<double> out(n_ + 1);
  double worst = 0;
  for (int c = 0; c <= n_; ++c) {
    std::vector<double> diag(5);
    std::vector<std::vector<double>> T(5);
    for (int k = 0; k < 5; ++k) {
      double h = h0 / (1 << k);
      std::vector<double> nodes(2 * p + 1);
      for (int i = 0; i <= 2 * p; ++i) nodes[i] = (i - p) * h;
      std::vector<double> w = fd_weights(order, nodes);
      double d = 0;
      for (int i = 0; i <= 2 * p; ++i) d += w[i] * vals[k][i][c];
      T[k].assign(k + 1, 0.0);
      T[k][0] = d;
      double pw = 1;
      for (int j = 1; j <= k; ++j) {
        pw *= 4;
        T[k][j] = T[k][j - 1] + (T[k][j - 1] - T[k - 1][j - 1]) / (pw - 1);
      }
      diag[k] = T[k][k];
    }
    out[c] = diag[4];
    worst = std::max(worst, std::fabs(diag[4] - diag[3]));
  }
  fd_error_ = worst;
  return out;
}

std::vector<Rat> DualCurve::z_exact(const Rat& x, int order) const {
  if (!symbolic_)
    throw std::logic_error("exact dual evaluation needs a polynomial model");
  std::vector<Rat> v(n_ + 1);
  for (int c = 0; c <= n_; ++c) v[c] = zp_[c].derivative(order).eval(x);
  return v;
}

double DualCurve::wronskian_y(double x) const {
  if (symbolic_) return wy_.eval_double(x);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= n_; ++i) rows.push_back(y_jet(x, i));
  return dbl_det(rows);
}

double DualCurve::wronskian_z(double x) const {
  if (symbolic_) return wz_.eval_double(x);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= n_; ++i) rows.push_back(z(x, i));
  return dbl_det(rows);
}

Rat DualCurve::wronskian_y_exact(const Rat& x) const {
  if (!symbolic_)
    throw std::logic_error("exact dual evaluation needs a polynomial model");
  return wy_.eval(x);
}

Rat DualCurve::wronskian_z_exact(const Rat& x) const {
  if (!symbolic_)
    throw std::logic_error("exact dual evaluation needs a polynomial model");
  return wz_.eval(x);
}

double DualCurve::relation_residual(double x) const {
  if (symbolic_) {
    Rat rx = scalar_traits<Rat>::from_double(x);
    Rat wy = wy_.eval(rx);
    Rat worst(0);
    for (int j = 0; j <= n_; ++j) {
      std::vector<Rat> zj = z_exact(rx, j);
      for (int i = 0; i + j <= n_; ++i) {
        Rat dot(0);
        for (int c = 0; c <= n_; ++c)
          dot += zj[c] * yp_[c].derivative(i).eval(rx);
        Rat target = (i + j == n_) ? (j % 2 == 0 ? wy : -wy) : Rat(0);
        Rat res = scalar_traits<Rat>::abs(dot - target);
        if (res > worst) worst = res;
      }
    }
    double scale = std::max(1.0, std::fabs(scalar_traits<Rat>::to_double(wy)));
    return scalar_traits<Rat>::to_double(worst) / scale;
  }

  double wy = wronskian_y(x);
  double worst = 0;
  for (int j = 0; j <= n_; ++j) {
    std::vector<double> zj = z(x, j);
    for (int i = 0; i + j <= n_; ++i) {
      std::vector<double> yi = y_jet(x, i);
      double dot = 0;
      for (int c = 0; c <= n_; ++c) dot += zj[c] * yi[c];
      double target = (i + j == n_) ? (j % 2 == 0 ? wy : -wy) : 0.0;
      double scale = std::max({1.0, std::fabs(wy), euclid(zj) * euclid(yi)});
      worst = std::max(worst, std::fabs(dot - target) / scale);
    }
  }
  return worst;
}

void DualCurve::finish_symbolic() {
  const int k = n_ + 1;
  std::vector<std::vector<Polynomial<Rat>>> rows(n_);
  for (int i = 0; i < n_; ++i) {
    rows[i].resize(k);
    for (int c = 0; c < k; ++c) rows[i][c] = yp_[c].derivative(i);
  }
  const std::uint32_t full = (1u << k) - 1;
  zp_.resize(k);
  for (int j = 0; j < k; ++j) {
    std::vector<std::vector<Polynomial<Rat>>> minor(n_);
    for (int i = 0; i < n_; ++i)
      for (int c = 0; c < k; ++c)
        if (c != j) minor[i].push_back(rows[i][c]);
    int sign = merge_sign(full ^ (1u << j), 1u << j);
    Polynomial<Rat> det = poly_det(minor);
    zp_[j] = sign > 0 ? det : -det;
  }

  std::vector<std::vector<Polynomial<Rat>>> wyrows(k), wzrows(k);
  for (int i = 0; i < k; ++i) {
    wyrows[i].resize(k);
    wzrows[i].resize(k);
    for (int c = 0; c < k; ++c) {
      wyrows[i][c] = yp_[c].derivative(i);
      wzrows[i][c] = zp_[c].derivative(i);
    }
  }
  wy_ = poly_det(wyrows);
  wz_ = poly_det(wzrows);
}

void DualCurve::check_wronskian_on_grid() const {
  const int steps = 200;
  double lo = domain_.lo[0], hi = domain_.hi[0];
  double scale = 0, least = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    double w = std::fabs(wronskian_y(lo + (hi - lo) * i / steps));
    scale = std::max(scale, w);
    least = std::min(least, w);
  }
  if (scale == 0 || least < 1e-12 * scale)
    throw std::invalid_argument("the curve Wronskian vanishes inside the domain");
}

DualCurve dual_map(const Manifold& mf) {
  if (mf.domain_dim() != 1)
    throw std::invalid_argument("dual curves need a one-dimensional model");
  DualCurve dc;
  dc.n_ = mf.ambient_dim();
  dc.domain_ = mf.domain();
  if (mf.polynomial()) {
    auto coeffs = mf.curve_coefficients();
    if (static_cast<int>(coeffs.size()) != mf.codomain_dim())
      throw std::logic_error("polynomial model without coefficient rows");
    dc.symbolic_ = true;
    dc.yp_.resize(dc.n_ + 1);
    dc.yp_[0] = Polynomial<Rat>::constant(Rat(1));
    dc.yp_[1] = Polynomial<Rat>::monomial(1);
    for (int l = 0; l < mf.codomain_dim(); ++l) {
      std::vector<Rat> rc;
      rc.reserve(coeffs[l].size());
      for (double v : coeffs[l]) rc.push_back(scalar_traits<Rat>::from_double(v));
      dc.yp_[2 + l] = Polynomial<Rat>(std::move(rc));
    }
    dc.finish_symbolic();
  } else {
    dc.mf_ = &mf;
  }
  dc.check_wronskian_on_grid();
  return dc;
}

DualCurve dual_map(const std::vector<Polynomial<Rat>>& f, Box domain) {
  if (domain.dim() != 1)
    throw std::invalid_argument("dual curves need a one-dimensional model");
  if (f.empty()) throw std::invalid_argument("the curve needs components");
  DualCurve dc;
  dc.n_ = 1 + static_cast<int>(f.size());
  dc.domain_ = std::move(domain);
  dc.symbolic_ = true;
  dc.yp_.resize(dc.n_ + 1);
  dc.yp_[0] = Polynomial<Rat>::constant(Rat(1));
  dc.yp_[1] = Polynomial<Rat>::monomial(1);
  for (size_t l = 0; l < f.size(); ++l) dc.yp_[2 + l] = f[l];
  dc.finish_symbolic();
  dc.check_wronskian_on_grid();
  return dc;
}

Rat wronskian(const std::vector<Polynomial<Rat>>& g, const Rat& x) {
  const int k = static_cast<int>(g.size());
  std::vector<std::vector<Rat>> m(k, std::vector<Rat>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m[i][j] = g[j].derivative(i).eval(x);
  return rat_det(std::move(m));
}

double wronskian(const std::vector<std::function<double(double, int)>>& jets,
                 double x) {
  const int k = static_cast<int>(jets.size());
  std::vector<std::vector<double>> m(k, std::vector<double>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m[i][j] = jets[j](x, i);
  return dbl_det(std::move(m));
}

WronskianReport wronskian_inequality_check(const DualCurve& dc,
                                           const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("no sample points");
  WronskianReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  const double tol = dc.symbolic() ? 1e-9 : 1e-6;
  for (double x : xs) {
    double wy = std::fabs(dc.wronskian_y(x));
    double wz = std::fabs(dc.wronskian_z(x));
    if (wy < 1e-12 * (1 + wz))
      throw std::invalid_argument("Wronskian vanishes at a sample");
    double ratio = wz / std::pow(wy, dc.n());
    if (ratio < 1 - tol)
      throw std::runtime_error("duality inequality failed at a sample");
    if (ratio < rep.min_ratio) {
      rep.min_ratio = ratio;
      rep.worst_x = x;
    }
    ++rep.samples;
  }
  return rep;
}

double derivative_bound_K1(const DualCurve& dc, int samples) {
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  double lo = dc.domain().lo[0], hi = dc.domain().hi[0];
  double sup = 0;
  for (int s = 0; s <= samples; ++s) {
    double x = lo + (hi - lo) * s / samples;
    for (int i = 0; i <= dc.n(); ++i) sup = std::max(sup, euclid(dc.z(x, i)));
  }
  return std::max(1.0 + 1e-9, 1.1 * sup);
}

WeightProfile curve_theta_profile(const DualCurve& dc, const CellParams& P,
                                  double K1, double C0) {
  if (K1 < 1) throw std::invalid_argument("derivative bound must be at least one");
  if (C0 < 1) throw std::invalid_argument("window constant must be at least one");
  const int n = dc.n();
  if (!(C0 * std::pow(P.Q, -3.0 / (2 * n - 1)) < P.psi &&
        P.psi < std::pow(P.Q, -1.0 / n)))
    throw std::invalid_argument("scale pair outside the exponent window");
  std::vector<double> theta(n + 1, K1 * P.psistar);
  theta[n - 1] = 2 * K1 / (std::pow(P.psistar, n - 1) * P.Qstar);
  theta[n] = 2 * K1 * P.kappa * P.Qstar;
  return make_weight_profile(std::move(theta));
}

ParallelepipedFamily dual_family(const DualCurve& dc) {
  ParallelepipedFamily fam;
  fam.k = dc.n() + 1;
  fam.domain = dc.domain();
  fam.rows = [dc](const std::vector<double>& x) {
    std::vector<std::vector<double>> G(dc.n() + 1);
    for (int i = 0; i <= dc.n(); ++i) G[i] = dc.z(x[0], i);
    return G;
  };
  return fam;
}

}  // namespace ratnear
