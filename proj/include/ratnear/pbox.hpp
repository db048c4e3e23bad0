// Families of origin-symmetric parallelepipeds cut by linear forms.
//
// A family is a matrix field G(x) on a box; the parallelepiped at x is
//   |g_i(x) . a| <= theta_i   (1 <= i <= k)
// and A(G, theta) is the set of x where it traps a nonzero integer a.
// Alongside membership and measure estimation, this module carries the
// weight bookkeeping that controls how fast the measure decays: the
// geometric mean of the thresholds, the leading-product skew, the local
// weight of a family against a subspace, and its stabilized limit.
// wronski_family builds the derivative matrix of scalar functions, whose
// rows complement every subspace away from countably many x.
// good_estimate measures the sublevel constant of a scalar function.

#pragma once

#include "ratnear/box.hpp"
#include "ratnear/multivector.hpp"
#include "ratnear/polynomial.hpp"
#include "ratnear/scalar.hpp"

#include <functional>
#include <vector>

namespace ratnear {

struct ParallelepipedFamily {
  int k = 0;
  Box domain;
  // Rows g_1(x)..g_k(x) of the matrix; must stay invertible on the domain.
  std::function<std::vector<std::vector<double>>(const std::vector<double>&)> rows;
};

double family_determinant(const ParallelepipedFamily& fam,
                          const std::vector<double>& x);

struct WeightProfile {
  std::vector<double> theta;  // positive thresholds
  double scalar = 0;          // geometric mean: scalar^k = theta_1 ... theta_k
  double tilde = 0;           // max over 1 <= r < k of theta_1...theta_r / scalar^r
};

WeightProfile make_weight_profile(std::vector<double> theta);

// Exact k-th powers of the profile quantities for rational-mode identities:
// scalar^k is the plain product, tilde^k is max_r (theta_1..theta_r)^k / product^r.
Rat weight_product(const std::vector<Rat>& theta);
Rat weight_tilde_pow_k(const std::vector<Rat>& theta);

// Whether a nonzero integer a satisfies |g_i(x) . a| <= theta_i for all i.
// Complete: coordinates are confined to |a|_inf <= ceil(|G(x)^-1|_inf max theta),
// refined per coordinate by eliminating the system to diagonal form with
// accumulated slack, and every candidate is checked against the original
// rows.  Throws on a singular matrix at the sample.
bool membership_A(const ParallelepipedFamily& fam, const std::vector<double>& theta,
                  const std::vector<double>& x);

// Grid fraction of B trapped in A(G, theta).  Requires the grid to resolve
// the smallest threshold: grid_h <= min theta_i / (10 max row norm).
double measure_A(const ParallelepipedFamily& fam, const std::vector<double>& theta,
                 const Box& B, double grid_h, int threads = 1);

// Local weight of the family at x against the subspace spanned by the
// decomposable V (1 <= codim V < k): the minimum of
//   scalar^{-r} theta_{j_1} ... theta_{j_r}
// over the r-element row sets whose span complements V, the direct sum
// tested by a non-vanishing wedge.
double theta_weight(const ParallelepipedFamily& fam, const WeightProfile& wp,
                    const std::vector<double>& x, const MultiVector<double>& V);

struct ThetaHatEstimate {
  double value = 0;
  // Per-radius suprema over the sampled subspaces; the final entry is the
  // reported value.
  std::vector<double> trace;
  bool stabilized = false;
};

// Stabilized local weight at x0: for each radius of the decreasing trace,
// minimize theta_weight over a punctured grid around x0, then take the
// supremum over a sampled set of subspaces (all coordinate ones plus random
// decomposables).  A trace whose last two entries disagree by more than 2%
// is flagged unstabilized.
ThetaHatEstimate theta_hat(const ParallelepipedFamily& fam, const WeightProfile& wp,
                           const std::vector<double>& x0,
                           const std::vector<double>& radii,
                           int subspace_samples = 40, unsigned long seed = 1);

// Derivative matrix G(x)[i][j] = d^i g_j(x) of scalar functions on an
// interval; jets[j](x, order) evaluates the order-th derivative of g_j.
// Rejects a vanishing determinant at the domain center.
ParallelepipedFamily wronski_family(std::vector<std::function<double(double, int)>> jets,
                                    Box domain);
ParallelepipedFamily wronski_family(const std::vector<Polynomial<double>>& gs,
                                    Box domain);

struct GoodnessEstimate {
  double alpha = 0;
  double C = 0;  // max sampled ratio measure{|f| < eps sup |f|} / (eps^alpha measure)
  Box worst_ball;
  double worst_eps = 0;
};

// Empirical sublevel constant of f over sampled sub-balls of B and a fixed
// epsilon grid.  alpha must be positive; a sampled ball where f vanishes
// identically is an error.
GoodnessEstimate good_estimate(const std::function<double(const std::vector<double>&)>& f,
                               const Box& B, double alpha);

}  // namespace ratnear
