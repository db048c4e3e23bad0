// Dual curves of one-dimensional Monge models.
//
// For the lifted curve y(x) = (1, x, f_1(x), ..., f_m(x)) in R^(n+1) the
// dual is z(x) = (y ^ y' ^ ... ^ y^(n-1))^perp.  Its derivative rows
// z, z', ..., z^(n) drive the parallelepiped counting at the sharper
// exponent 3/(2n-1).  Polynomial models evaluate symbolically and
// exactly; smooth models use central differences with Richardson
// extrapolation, and the differential identities
//
//   z^(j) . y^(i) = 0            (i + j <= n-1)
//   z^(j) . y^(i) = (-1)^j W_y   (i + j = n)
//
// double as the convergence gate (relation_residual below).

#pragma once

#include "ratnear/box.hpp"
#include "ratnear/cells.hpp"
#include "ratnear/manifold.hpp"
#include "ratnear/pbox.hpp"
#include "ratnear/polynomial.hpp"

#include <functional>
#include <vector>

namespace ratnear {

class DualCurve {
 public:
  int n() const { return n_; }
  bool symbolic() const { return symbolic_; }
  const Box& domain() const { return domain_; }

  // z^(order)(x).  The numeric path records an extrapolation error
  // estimate retrievable through fd_error().
  std::vector<double> z(double x, int order = 0) const;
  std::vector<Rat> z_exact(const Rat& x, int order = 0) const;

  double wronskian_y(double x) const;
  double wronskian_z(double x) const;
  Rat wronskian_y_exact(const Rat& x) const;
  Rat wronskian_z_exact(const Rat& x) const;

  // Worst relative residual of the differential identities at x over all
  // orders i + j <= n.  Exactly zero on the symbolic path.
  double relation_residual(double x) const;

  double fd_error() const { return fd_error_; }

 private:
  DualCurve() = default;
  void finish_symbolic();
  void check_wronskian_on_grid() const;
  std::vector<double> y_jet(double x, int order) const;

  friend DualCurve dual_map(const Manifold& mf);
  friend DualCurve dual_map(const std::vector<Polynomial<Rat>>& f, Box domain);

  int n_ = 0;
  bool symbolic_ = false;
  Box domain_;
  const Manifold* mf_ = nullptr;  // numeric path only, non-owning
  std::vector<Polynomial<Rat>> yp_, zp_;
  Polynomial<Rat> wy_, wz_;
  mutable double fd_error_ = 0;
};

// Dual of the lifted graph curve of a one-dimensional model.  The model
// must outlive the returned object on the numeric path.  Rejects models
// whose curve Wronskian vanishes somewhere on the domain.
DualCurve dual_map(const Manifold& mf);

// Dual of the explicit curve (x, f_1(x), ..., f_m(x)).
DualCurve dual_map(const std::vector<Polynomial<Rat>>& f, Box domain);

// Wronskian of k scalar functions at x: det(g_j^(i-1)(x)).
Rat wronskian(const std::vector<Polynomial<Rat>>& g, const Rat& x);
double wronskian(const std::vector<std::function<double(double, int)>>& jets,
                 double x);

struct WronskianReport {
  int samples = 0;
  double min_ratio = 0;  // min over samples of |W_z| / |W_y|^n
  double worst_x = 0;
};

// Asserts |W_z(x)| >= |W_y(x)|^n at every sample; a violation beyond the
// evaluation tolerance is a hard failure and throws.
WronskianReport wronskian_inequality_check(const DualCurve& dc,
                                           const std::vector<double>& xs);

// Upper bound on |z^(i)(x)| over the domain for i = 0..n, sampled on a
// grid and inflated by 1.1 so it is safe to use as a true bound.
double derivative_bound_K1(const DualCurve& dc, int samples = 200);

// Row thresholds for the dual derivative matrix at the working scales:
// n-1 copies of K1 psi*, then 2 K1 (psi*^(n-1) Q*)^-1, then 2 K1 kappa Q*.
// The scale pair (psi, Q) of P must sit inside the exponent window
// C0 Q^(-3/(2n-1)) < psi < Q^(-1/n).
WeightProfile curve_theta_profile(const DualCurve& dc, const CellParams& P,
                                  double K1, double C0 = 1.0);

// The derivative rows of z as a parallelepiped family on the domain.
ParallelepipedFamily dual_family(const DualCurve& dc);

}  // namespace ratnear
