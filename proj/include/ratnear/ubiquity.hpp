// Resonant rational pairs near a model and the finite-scale statistics
// built on them: dyadic level sets of near-hits, the shrinking ball radius
// attached to each level, empirical coverage fractions of a base box,
// pointwise transfer of near-hits into full approximation solutions, and
// box-counting dimension estimates along a scale sequence.

#pragma once

#include "ratnear/box.hpp"
#include "ratnear/manifold.hpp"
#include "ratnear/rats.hpp"

#include <functional>
#include <vector>

namespace ratnear {

// The pairs (q, a) with q <= 2^t, a/q inside a base box and
// max_l ||q f_l(a/q)|| <= psi(q) / 2, each stored with the integer vector b
// nearest to q f(a/q).  Entries are raw pairs — a multiple of a reduced
// fraction counts as its own member — so the level-t set is always a prefix
// of the level-(t+1) set.  Level t carries the common ball radius rho(2^t),
// where rho(q) = rho0 * (psi(q)^m q^(d+1))^(-1/d).  The model must outlive
// the system.
class ResonantSystem {
 public:
  // psi must be positive at every q >= 1 that gets enumerated; rho0 > 0;
  // the base box must sit inside the model domain.
  ResonantSystem(const Manifold& mf, Box base, std::function<double(double)> psi,
                 double rho0);

  // Members with q <= 2^t in (q, a) order, 1 <= t <= 20.  Decisions are
  // exact for polynomial models and double-precision for smooth ones; the
  // output does not depend on the thread count.
  std::vector<RationalPoint> members(int t, int threads = 1) const;

  double rho(double q) const;
  double psi(double q) const { return psi_(q); }
  double rho0() const { return rho0_; }
  const Box& base() const { return base_; }
  const Manifold& model() const { return *mf_; }

 private:
  const Manifold* mf_;
  Box base_;
  std::function<double(double)> psi_;
  double rho0_;
};

// Fraction of B covered by the union of balls B(a/q, rho(2^t)) over the
// level-t members with q > qmin, measured by the midpoint rule on a grid of
// step grid_h.  grid_h = 0 picks rho(2^t) / 10; an explicit step coarser
// than that is rejected.  Setting qmin = delta * 2^t keeps only the
// denominator range that cell detection certifies, which can only shrink
// the covered set.
double ubiquity_fraction(const ResonantSystem& rs, int t, const Box& B,
                         double qmin = 0, double grid_h = 0, int threads = 1);

// Constants the detection machinery attaches to a coverage experiment: the
// guaranteed asymptotic floor 2^(-d-1) for the covered fraction, and the
// radius multiplier (c0^(n+d+1) kappa^(-2n))^(1/d) induced by the body
// scaling constants c0 and kappa.
double coverage_floor(int d);
double detection_rho0(double c0, double kappa, int n, int d);

// Spot check that near-hits transfer to full solutions: around each
// level-t member, points x within psi(q) / (2 c1 q) of a/q (c1 = the model
// Lipschitz constant, raised to at least 1) must satisfy both
// |q x - a|_inf < psi(q) and |q f(x) - b|_inf < psi(q).
struct TransferReport {
  long long samples = 0;
  long long violations = 0;
  double worst_margin = 0;  // largest residual / psi(q) seen; < 1 when clean
};
TransferReport transfer_check(const ResonantSystem& rs, int t, int per_member,
                              unsigned long long seed);

// Box-counting record along a scale sequence.
struct DimEstimate {
  double tau = 0;
  std::vector<double> scales;     // box sizes s_Q = Q^-(1+tau)
  std::vector<long long> counts;  // distinct boxes holding a hit center
  double slope = 0;               // fitted d log(count) / d log(1/s)
  double dimension = 0;           // slope clamped to [0, d]
  double confidence = 0;          // 95% half-width of the slope
  double r2 = 0;
  // r2 >= 0.95 and the slopes of the three longest scale prefixes agree
  // within 0.05; estimates should only be quoted when this holds.
  bool reliable = false;
};

// For each Q in an increasing sequence of at least four scales, collects
// the centers a/q with q <= Q and max_l ||q f_l(a/q)|| <= q^(-tau) / 2,
// counts the distinct boxes of size s_Q = Q^(-(1+tau)) they occupy inside B
// (default: the model domain) and fits log count against log(1/s).  The
// ball radius q^(-(1+tau)) of an individual hit sets the box size at the
// top scale; boxes are counted on centers so that a handful of small-q
// members cannot flood the count.  The unit circle is enumerated exactly
// through the coprime parameterization (u^2 - v^2, 2uv, u^2 + v^2) of its
// rational points; every other curve is scanned directly.  Throws when
// every scale comes out empty.
DimEstimate dim_estimate(const Manifold& mf, double tau,
                         const std::vector<double>& Qseq, Box B = Box(),
                         int threads = 1);

}  // namespace ratnear
