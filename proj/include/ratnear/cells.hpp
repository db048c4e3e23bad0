// Lattice cells along the frame decomposition.
//
// For a parameter x and weights (psistar, theta_u, kappa Qstar), the body
//   |g . r| <= psistar |g|,  |u . r| <= theta_u |u|,  |y . r| <= kappa Qstar |y|
// is an orthogonal product of balls and has volume 2^(n+1) kappa v_d v_m.
// At kappa = kappa0 := (v_d v_m)^(-1) the volume hits the threshold where a
// nonzero integer point must exist.  A parameter is "good" when the body at
// the working kappa < kappa0 holds no such point; detection then solves the
// kappa0 body instead and reads off a nearby rational point.
//
// All comparisons treat the body as closed.  Polynomial models at rational
// parameters are decided exactly (double screening with an exact integer
// re-check near the boundary).

#pragma once

#include "ratnear/frames.hpp"
#include "ratnear/manifold.hpp"
#include "ratnear/rats.hpp"

#include <vector>

namespace ratnear {

// (v_d * v_m)^(-1) where v_j is the volume of the j-dimensional ball of
// radius 1/2.
double kappa0(int d, int m);

// Conservative default driving constant: the largest of
//   eps0^(-2), kappa0 + 1, 16 C^2 (n+1)^4, 6 K (kappa0 + 1) (n+1)^2 C^2
// with eps0 = min(1, inradius(B)) / (4 d (n+1) C) and K the parameter-step
// factor.  Callers may pass a smaller c0 explicitly; anything that depends
// on it then carries that choice.
double default_c0(const Manifold& mf, const Box& B, double C);

// kappa making a (C, alpha)-good height profile contract by 1/4 per scale:
// (4 K0)^(-(n+1)/alpha).
double kappa_for_goodness(double K0, double alpha, int n);

struct CellParams {
  // Inputs.
  double Qstar = 0, psistar = 0, kappa = 0, c0 = 0;
  // Derived.
  double theta_u = 0;  // (psistar^m Qstar)^(-1/d)
  double delta0 = 0;   // kappa / c0
  double rho = 0;      // c0 kappa^-2 (psistar^m Qstar^(d+1))^(-1/d)
  double Q = 0;        // c0 Qstar
  double psi = 0;      // c0 kappa^-2 psistar
};

// Validates and derives the working constants.  Requires
//   0 < kappa <= kappa0,
//   kappa^(-d/(2n-d)) Qstar^(-(d+2)/(2n-d)) <= psistar <= 1,
// and the size condition
//   Qstar >= max(c0 / kappa^2, c0^2 / (kappa^4 inradius(B)))   (default)
//   Qstar >= 4 c0^2 kappa^-4                                   (uniform rule).
CellParams make_cell_params(const Manifold& mf, const Box& B, double Qstar,
                            double psistar, double kappa, double c0,
                            bool uniform_size_rule = false);

struct BodySolution {
  bool found = false;
  std::vector<long long> r;  // n+1 entries when found
};

// Nonzero integer point of the closed body at x with the given radii
// (height = the radius along y), or found = false when the body is empty
// of lattice points.  The search is complete: the body confines each
// coordinate of a solution to an explicit window around q x_i and q f_l(x).
BodySolution find_integer_point(const Manifold& mf, const std::vector<Rat>& x,
                                double psistar, double theta_u, double height);

// No nonzero integer point in the kappa-body at x.
bool good_set_member(const Manifold& mf, const CellParams& cp,
                     const std::vector<Rat>& x);

struct Detection {
  RationalPoint point;
  double param_dist = 0;  // |x - a/q|_inf
  double residual = 0;    // |q f(a/q) - b|_inf
};

// For a good parameter x, solves the kappa0 body (a point exists by the
// volume threshold), primitivizes, orients q = r_0 > 0 and returns the
// rational point with its distances.  Throws if x is not good or if the
// threshold body unexpectedly holds no point.
Detection detect(const Manifold& mf, const CellParams& cp, const std::vector<Rat>& x);

// Rows of the adapted (n+1) x (n+1) matrix field at x, seeded at x0: the
// frame subspaces at x0 yield orthonormal bases scaled by 1/2, and each
// seed vector is carried to x by projecting onto the matching subspace of
// the frame at x.  Near x0 the rows stay independent, have norm <= 1, and
// row i lies in V(g(x)), V(u(x)) or span(y(x)) according to its block.
std::vector<std::vector<double>> adapted_matrix(const Manifold& mf,
                                                const std::vector<double>& x0,
                                                const std::vector<double>& x);

struct ThetaProfile {
  std::vector<double> theta;     // n+1 weights in adapted row order
  double theta_scalar = 0;       // (prod theta_i)^(1/(n+1)) = kappa^(1/(n+1))
  double cstar = 0;              // min(psistar Qstar^(1/m), 1 / psistar)
  double theta_hat_bound = 0;    // (kappa cstar)^(-1/(n+1))
};

// Weight profile matching the adapted rows: psistar on the m normal rows,
// theta_u on the d tangential rows, kappa Qstar on the height row.
// Requires the window constant cstar > 1.
ThetaProfile theta_profile(const Manifold& mf, const CellParams& cp);

}  // namespace ratnear
