// Rational points near a Monge graph.
//
// A RationalPoint is a primitive integer triple (q, a, b), q >= 1 and
// gcd(q, a_1..a_d, b_1..b_m) = 1, standing for the rational point
// (a/q, b/q) in R^n.  enumerate_R lists the points whose parameter part
// lies in a box and whose scaled vertical residual |q f(a/q) - b|_inf is
// small; count_N counts the points within Euclidean distance eps of the
// graph itself.

#pragma once

#include "ratnear/box.hpp"
#include "ratnear/manifold.hpp"

#include <vector>

namespace ratnear {

struct RationalPoint {
  long long q = 1;
  std::vector<long long> a;  // d entries
  std::vector<long long> b;  // m entries
};

bool operator==(const RationalPoint& l, const RationalPoint& r);
bool operator<(const RationalPoint& l, const RationalPoint& r);  // (q, a, b) order

// |q f(a/q) - b|_inf, exact; needs a polynomial model.
Rat residual_exact(const Manifold& mf, const RationalPoint& p);

// Same residual through 50-digit evaluation, for smooth models.
double residual(const Manifold& mf, const RationalPoint& p);

// All primitive triples with delta * Q < q <= Q, a/q in B (exactly) and
// residual <= psi, in canonical (q, a, b) order.  Component decisions are
// exact for polynomial models.  The scan over b never loops: residual <=
// psi confines each b_l to an integer window around q f_l(a/q).
std::vector<RationalPoint> enumerate_R(const Manifold& mf, const Box& B, double Q,
                                       double delta, double psi, int threads = 1);

struct NearCount {
  long long accepted = 0;
  long long ambiguous = 0;
};

// Distinct primitive rational points p/q with q <= Q and Euclidean distance
// to the graph over B at most eps.  The circle model is decided exactly
// through a rational band test (valid for eps < sqrt(r)) plus a 50-digit
// arc check.  Polynomial curves minimize the squared distance over the
// confining window; results within a factor (1 +- 1e-6) of eps are tallied
// as ambiguous instead of accepted.
NearCount count_N(const Manifold& mf, const Box& B, double Q, double eps,
                  int threads = 1);

// Fraction of B covered by the union of Euclidean balls B(center, rho),
// measured on a grid of step at most rho / 10.
double coverage_measure(const std::vector<std::vector<double>>& centers, double rho,
                        const Box& B);

struct ExponentFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  double slope_stderr = 0;  // half-width of the usual 95% band is 1.96 * this
};

// Least squares fit of log y = slope * log x + intercept.
ExponentFit exponent_fit(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace ratnear
