// Orthogonal frames along a Monge graph.
//
// At a parameter x the lifted point is y = (1, x, f(x)) in R^(n+1).  The
// frame splits the ambient space into three mutually orthogonal pieces:
//   span(y)                     dimension 1,
//   V(u) = tangent minus y      dimension d,
//   V(g) = normal piece         dimension m,
// encoded by the decomposable elements
//   g = (y ^ d_1 y ^ ... ^ d_d y)^perp   (grade m),
//   u = (y ^ g)^perp                     (grade d).
//
// distance_split measures a point against the frame; nearest_parameter
// walks from x to a parameter whose lift is projectively close to a given
// point, with an explicit error bound in terms of the local bound C.

#pragma once

#include "ratnear/manifold.hpp"
#include "ratnear/multivector.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ratnear {

template <class S>
struct Frame {
  std::vector<S> x;
  MultiVector<S> y, g, u;
};

Frame<double> frame_at(const Manifold& mf, const std::vector<double>& x);

// Exact frame; needs a polynomial model and a rational parameter.
Frame<Rat> frame_at_exact(const Manifold& mf, const std::vector<Rat>& x);

// Projections of a point r against the frame, normalized by |r|:
//   dg = |g . r| / (|g| |r|),  du = |u . r| / (|u| |r|),
//   dy = |y ^ r| / (|y| |r|)  (the projective distance to the line of y).
// These satisfy dy^2 = dg^2 + du^2, hence dy <= dg + du.
struct DistanceSplit {
  double dg, du, dy;
};

DistanceSplit distance_split(const Frame<double>& fr, const std::vector<double>& r);

// Local bound C >= 1 for the box b0: 2*b0 fits inside [-C, C]^d and C
// dominates |f_l|, |d_i f_l|, |d_i d_j f_l| over (2*b0) intersected with
// the model's domain.  Grid-sampled and inflated by 1.25.
double local_bound(const Manifold& mf, const Box& b0);

// Largest admissible eps for nearest_parameter:
// min(1, inradius(b0)) / (2 d (n+1) (C+1)^2).
double eps0_bound(const Manifold& mf, const Box& b0, double C);

// Guarantee factor K with d_p(y(x'), r) <= K delta on acceptance:
// K = 14 (n+1)^3 (C+1)^5 d^2.
double parameter_step_factor(const Manifold& mf, double C);

struct ParameterStep {
  bool accepted = false;
  std::string reason;            // set when rejected
  std::vector<double> x_new;     // lies in 2*b0 when accepted
  double guarantee = 0;          // K * delta
  double dg = 0, du = 0;         // measured projections of r
};

// Given a witness parameter x whose frame sees r within (delta, eps) in the
// sense dg/|r| < delta, du/|r| < eps, with eps^2 <= delta <= eps <= eps0,
// produces x' in 2*b0 with d_p(y(x'), r) <= K delta.  Rejections carry the
// failed condition in `reason`.
ParameterStep nearest_parameter(const Manifold& mf, const Box& b0, double C,
                                const std::vector<double>& x,
                                const std::vector<double>& r, double delta,
                                double eps);

}  // namespace ratnear
