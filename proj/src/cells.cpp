#include "ratnear/cells.hpp"

#include "ratnear/multivector.hpp"
#include "ratnear/numutil.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ratnear {

namespace {

// Volume of the j-dimensional ball of radius 1/2 by the two-step
// recurrence v_j = (pi / (2j)) v_{j-2}; v_0 = v_1 = 1 exactly.
double half_ball_volume(int j) {
  double even = 1, odd = 1;
  for (int i = 2; i <= j; ++i) {
    double& v = (i % 2 == 0) ? even : odd;
    v *= M_PI / (2 * i);
  }
  return (j % 2 == 0) ? even : odd;
}

// Rows of the linear map r -> w . r for a grade-p element w: the row for a
// (p-1)-mask K has entry sign({j}, K) w[K | {j}] in column j (j not in K).
std::vector<std::vector<double>> interior_rows(const MultiVector<double>& w) {
  const int k = w.dim(), p = w.grade();
  const auto& km = subset_masks(k, p - 1);
  std::vector<std::vector<double>> rows(km.size(), std::vector<double>(k, 0.0));
  for (size_t a = 0; a < km.size(); ++a)
    for (int j = 0; j < k; ++j) {
      if (km[a] & (1u << j)) continue;
      double c = w.coeff(km[a] | (1u << j));
      rows[a][j] = merge_sign(1u << j, km[a]) < 0 ? -c : c;
    }
  return rows;
}

double rows_norm_sq(const std::vector<std::vector<double>>& rows,
                    const std::vector<long long>& r) {
  double acc = 0;
  for (const auto& row : rows) {
    double s = 0;
    for (size_t j = 0; j < row.size(); ++j) s += row[j] * static_cast<double>(r[j]);
    acc += s * s;
  }
  return acc;
}

enum class Screen { inside, outside, boundary };

// Compares value_sq against limit_sq with a relative safety band; boundary
// cases are handed to the exact path.
Screen classify(double value_sq, double limit_sq) {
  const double band = 1e-7;
  if (value_sq > limit_sq * (1 + band)) return Screen::outside;
  if (value_sq < limit_sq * (1 - band)) return Screen::inside;
  return Screen::boundary;
}

struct ExactBody {
  bool available = false;
  MultiVector<Rat> g, u, y;
  Rat gg, uu, yy;        // squared norms
  Rat ps2, th2, he2;     // squared radii
};

bool exact_inside(const ExactBody& body, const std::vector<long long>& r) {
  const int k = body.y.dim();
  std::vector<Rat> rc(k);
  for (int i = 0; i < k; ++i) rc[i] = Rat(r[i]);
  auto rv = MultiVector<Rat>::vector(k, rc);
  if (norm_sq(interior(body.g, rv)) > body.ps2 * body.gg) return false;
  if (norm_sq(interior(body.u, rv)) > body.th2 * body.uu) return false;
  Rat sy = inner(body.y, rv);
  return sy * sy <= body.he2 * body.yy;
}

void primitivize(std::vector<long long>& r) {
  long long g = 0;
  for (long long v : r) g = std::gcd(g, v < 0 ? -v : v);
  if (g > 1)
    for (long long& v : r) v /= g;
}

}  // namespace

double kappa0(int d, int m) {
  if (d < 1 || m < 1) throw std::invalid_argument("dimensions must be positive");
  return 1.0 / (half_ball_volume(d) * half_ball_volume(m));
}

double default_c0(const Manifold& mf, const Box& B, double C) {
  const int d = mf.domain_dim(), n = mf.ambient_dim();
  const double k0 = kappa0(d, mf.codomain_dim());
  const double eps0 = std::min(1.0, B.inradius()) / (4.0 * d * (n + 1) * C);
  const double K = parameter_step_factor(mf, C);
  return std::max({1.0 / (eps0 * eps0), k0 + 1,
                   16 * C * C * std::pow(n + 1.0, 4),
                   6 * K * (k0 + 1) * (n + 1.0) * (n + 1.0) * C * C});
}

double kappa_for_goodness(double K0, double alpha, int n) {
  if (K0 <= 0 || alpha <= 0) throw std::invalid_argument("goodness constants must be positive");
  return std::pow(4 * K0, -(n + 1) / alpha);
}

CellParams make_cell_params(const Manifold& mf, const Box& B, double Qstar,
                            double psistar, double kappa, double c0,
                            bool uniform_size_rule) {
  const int d = mf.domain_dim(), m = mf.codomain_dim(), n = mf.ambient_dim();
  const double k0 = kappa0(d, m);
  if (!(c0 >= 1)) throw std::invalid_argument("driving constant must be at least 1");
  if (!(kappa > 0 && kappa <= k0 * (1 + 1e-12)))
    throw std::invalid_argument("kappa must lie in (0, kappa0]");
  const double lo = std::pow(kappa, -static_cast<double>(d) / (2 * n - d)) *
                    std::pow(Qstar, -static_cast<double>(d + 2) / (2 * n - d));
  if (!(psistar >= lo && psistar <= 1))
    throw std::invalid_argument("weight outside the admissible window");
  if (uniform_size_rule) {
    if (!(Qstar >= 4 * c0 * c0 / std::pow(kappa, 4)))
      throw std::invalid_argument("height bound below the uniform size threshold");
  } else {
    const double need = std::max(c0 / (kappa * kappa),
                                 c0 * c0 / (std::pow(kappa, 4) * B.inradius()));
    if (!(Qstar >= need))
      throw std::invalid_argument("height bound below the size threshold");
  }
  CellParams cp;
  cp.Qstar = Qstar;
  cp.psistar = psistar;
  cp.kappa = kappa;
  cp.c0 = c0;
  cp.theta_u = std::pow(std::pow(psistar, m) * Qstar, -1.0 / d);
  cp.delta0 = kappa / c0;
  cp.rho = c0 / (kappa * kappa) *
           std::pow(std::pow(psistar, m) * std::pow(Qstar, d + 1), -1.0 / d);
  cp.Q = c0 * Qstar;
  cp.psi = c0 / (kappa * kappa) * psistar;
  return cp;
}

BodySolution find_integer_point(const Manifold& mf, const std::vector<Rat>& x,
                                double psistar, double theta_u, double height) {
  const int d = mf.domain_dim(), m = mf.codomain_dim(), n = mf.ambient_dim();
  const int k = n + 1;
  if (!(psistar > 0 && theta_u > 0 && height > 0))
    throw std::invalid_argument("body radii must be positive");

  std::vector<double> xd(d);
  for (int i = 0; i < d; ++i) xd[i] = scalar_traits<Rat>::to_double(x[i]);

  ExactBody body;
  Frame<double> fr;
  if (mf.polynomial()) {
    Frame<Rat> fe = frame_at_exact(mf, x);
    body.available = true;
    body.g = fe.g;
    body.u = fe.u;
    body.y = fe.y;
    body.gg = norm_sq(fe.g);
    body.uu = norm_sq(fe.u);
    body.yy = norm_sq(fe.y);
    Rat ps = scalar_traits<Rat>::from_double(psistar);
    Rat th = scalar_traits<Rat>::from_double(theta_u);
    Rat he = scalar_traits<Rat>::from_double(height);
    body.ps2 = ps * ps;
    body.th2 = th * th;
    body.he2 = he * he;
    fr.y = to_double_mv(fe.y);
    fr.g = to_double_mv(fe.g);
    fr.u = to_double_mv(fe.u);
  } else {
    fr = frame_at(mf, xd);
  }

  const auto g_rows = interior_rows(fr.g);
  const auto u_rows = interior_rows(fr.u);
  const std::vector<double>& y_row = fr.y.coefficients();
  const double ps_lim = psistar * psistar * norm_sq(fr.g);
  const double th_lim = theta_u * theta_u * norm_sq(fr.u);
  const double he_lim = height * height * norm_sq(fr.y);

  // Any solution r of the closed body satisfies, with w = psistar + theta_u,
  //   |r_0| <= height + w,
  //   |r_i - r_0 x_i|      <= (1 + |x_i|)   w   for 1 <= i <= d,
  //   |r_{d+l} - r_0 f_l|  <= (1 + |f_l|)   w   for 1 <= l <= m,
  // because r splits orthogonally into pieces of norms at most psistar,
  // theta_u and height, and |y| >= 1.  The windows below carry an extra
  // integer of slack against double rounding, so the scan is complete.
  const double w = psistar + theta_u;
  std::vector<double> fd = mf.eval(xd);
  std::vector<double> center(n), width(n);
  for (int i = 0; i < d; ++i) width[i] = (1 + std::fabs(xd[i])) * w;
  for (int l = 0; l < m; ++l) width[d + l] = (1 + std::fabs(fd[l])) * w;
  const long long qmax = static_cast<long long>(std::floor(height + w)) + 1;

  std::vector<long long> r(k), lo(n), hi(n);
  for (long long q = 0; q <= qmax; ++q) {
    r[0] = q;
    for (int i = 0; i < d; ++i) center[i] = static_cast<double>(q) * xd[i];
    for (int l = 0; l < m; ++l) center[d + l] = static_cast<double>(q) * fd[l];
    for (int i = 0; i < n; ++i) {
      lo[i] = static_cast<long long>(std::ceil(center[i] - width[i])) - 1;
      hi[i] = static_cast<long long>(std::floor(center[i] + width[i])) + 1;
      r[i + 1] = lo[i];
    }
    while (true) {
      bool nonzero = q != 0;
      for (int i = 1; i < k && !nonzero; ++i) nonzero = r[i] != 0;
      if (nonzero) {
        Screen sg = classify(rows_norm_sq(g_rows, r), ps_lim);
        if (sg != Screen::outside) {
          Screen su = classify(rows_norm_sq(u_rows, r), th_lim);
          if (su != Screen::outside) {
            double sy = 0;
            for (int i = 0; i < k; ++i) sy += y_row[i] * static_cast<double>(r[i]);
            Screen sh = classify(sy * sy, he_lim);
            if (sh != Screen::outside) {
              bool ok;
              if (body.available) {
                ok = exact_inside(body, r);
              } else {
                ok = sg != Screen::boundary && su != Screen::boundary &&
                     sh != Screen::boundary;
                if (!ok)
                  ok = rows_norm_sq(g_rows, r) <= ps_lim &&
                       rows_norm_sq(u_rows, r) <= th_lim && sy * sy <= he_lim;
              }
              if (ok) return {true, r};
            }
          }
        }
      }
      int i = 0;
      for (; i < n; ++i) {
        if (r[i + 1] < hi[i]) {
          ++r[i + 1];
          break;
        }
        r[i + 1] = lo[i];
      }
      if (i == n) break;
    }
  }
  return {false, {}};
}

bool good_set_member(const Manifold& mf, const CellParams& cp,
                     const std::vector<Rat>& x) {
  return !find_integer_point(mf, x, cp.psistar, cp.theta_u, cp.kappa * cp.Qstar).found;
}

Detection detect(const Manifold& mf, const CellParams& cp, const std::vector<Rat>& x) {
  const int d = mf.domain_dim(), m = mf.codomain_dim();
  if (!good_set_member(mf, cp, x))
    throw std::invalid_argument("detection needs a good parameter");
  BodySolution sol =
      find_integer_point(mf, x, cp.psistar, cp.theta_u, kappa0(d, m) * cp.Qstar);
  if (!sol.found) throw std::runtime_error("threshold body held no lattice point");
  primitivize(sol.r);
  if (sol.r[0] < 0)
    for (long long& v : sol.r) v = -v;
  if (sol.r[0] == 0) throw std::runtime_error("threshold body gave a horizontal point");

  Detection det;
  det.point.q = sol.r[0];
  det.point.a.assign(sol.r.begin() + 1, sol.r.begin() + 1 + d);
  det.point.b.assign(sol.r.begin() + 1 + d, sol.r.end());
  Rat dist(0);
  for (int i = 0; i < d; ++i) {
    Rat e = scalar_traits<Rat>::abs(x[i] - Rat(det.point.a[i]) / Rat(det.point.q));
    dist = std::max(dist, e);
  }
  det.param_dist = scalar_traits<Rat>::to_double(dist);
  det.residual = mf.polynomial()
                     ? scalar_traits<Rat>::to_double(residual_exact(mf, det.point))
                     : residual(mf, det.point);
  return det;
}

namespace {

// Orthonormal basis of the span of a decomposable element, scaled by 1/2.
std::vector<MultiVector<double>> seed_basis(const MultiVector<double>& w) {
  const int k = w.dim(), p = w.grade();
  std::vector<MultiVector<double>> basis;
  for (int j = 0; j < k && static_cast<int>(basis.size()) < p; ++j) {
    auto v = project(w, MultiVector<double>::basis_vector(k, j));
    for (const auto& b : basis) {
      double c = inner(v, b) / norm_sq(b);
      v = v - b * c;
    }
    double nv = norm(v);
    if (nv > 1e-8) {
      v /= nv * 2;
      basis.push_back(v);
    }
  }
  if (static_cast<int>(basis.size()) != p)
    throw std::runtime_error("failed to extract a basis of the frame subspace");
  return basis;
}

}  // namespace

std::vector<std::vector<double>> adapted_matrix(const Manifold& mf,
                                                const std::vector<double>& x0,
                                                const std::vector<double>& x) {
  Frame<double> f0 = frame_at(mf, x0);
  Frame<double> fx = frame_at(mf, x);
  std::vector<MultiVector<double>> seeds = seed_basis(f0.g);
  for (auto& v : seed_basis(f0.u)) seeds.push_back(v);
  for (auto& v : seed_basis(f0.y)) seeds.push_back(v);

  const int m = mf.codomain_dim(), n = mf.ambient_dim();
  std::vector<std::vector<double>> rows;
  rows.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const MultiVector<double>& target = i < m ? fx.g : (i < n ? fx.u : fx.y);
    rows.push_back(project(target, seeds[i]).coefficients());
  }
  return rows;
}

ThetaProfile theta_profile(const Manifold& mf, const CellParams& cp) {
  const int d = mf.domain_dim(), m = mf.codomain_dim(), n = mf.ambient_dim();
  ThetaProfile tp;
  tp.cstar = std::min(cp.psistar * std::pow(cp.Qstar, 1.0 / m), 1.0 / cp.psistar);
  if (!(tp.cstar > 1))
    throw std::invalid_argument("weight window violated: the profile constant must exceed 1");
  tp.theta.assign(m, cp.psistar);
  tp.theta.insert(tp.theta.end(), d, cp.theta_u);
  tp.theta.push_back(cp.kappa * cp.Qstar);
  tp.theta_scalar = std::pow(cp.kappa, 1.0 / (n + 1));
  tp.theta_hat_bound = std::pow(cp.kappa * tp.cstar, -1.0 / (n + 1));
  return tp;
}

}  // namespace ratnear
