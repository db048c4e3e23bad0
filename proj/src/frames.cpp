#include "ratnear/frames.hpp"

#include <cmath>
#include <stdexcept>

namespace ratnear {
namespace {

template <class S>
Frame<S> assemble(int d, int m, std::vector<S> x, const std::vector<S>& f,
                  const std::vector<std::vector<S>>& df) {
  const int k = d + m + 1;
  std::vector<S> yc;
  yc.reserve(k);
  yc.push_back(S(1));
  for (int i = 0; i < d; ++i) yc.push_back(x[i]);
  for (int l = 0; l < m; ++l) yc.push_back(f[l]);
  auto y = MultiVector<S>::vector(k, yc);

  auto span = y;  // y ^ d_1 y ^ ... ^ d_d y
  for (int i = 0; i < d; ++i) {
    std::vector<S> t(k, S(0));
    t[1 + i] = S(1);
    for (int l = 0; l < m; ++l) t[1 + d + l] = df[l][i];
    span = wedge(span, MultiVector<S>::vector(k, t));
  }
  auto g = hodge(span);
  auto u = hodge(wedge(y, g));
  return Frame<S>{std::move(x), std::move(y), std::move(g), std::move(u)};
}

}  // namespace

Frame<double> frame_at(const Manifold& mf, const std::vector<double>& x) {
  Jet j = mf.jet(x);
  return assemble(mf.domain_dim(), mf.codomain_dim(), x, j.f, j.df);
}

Frame<Rat> frame_at_exact(const Manifold& mf, const std::vector<Rat>& x) {
  JetExact j = mf.jet_exact(x);
  return assemble(mf.domain_dim(), mf.codomain_dim(), x, j.f, j.df);
}

DistanceSplit distance_split(const Frame<double>& fr, const std::vector<double>& r) {
  auto rv = MultiVector<double>::vector(fr.y.dim(), r);
  double rn = norm(rv);
  if (rn == 0) throw std::invalid_argument("distance split of the zero point");
  DistanceSplit out;
  out.dg = norm(interior(fr.g, rv)) / (norm(fr.g) * rn);
  out.du = norm(interior(fr.u, rv)) / (norm(fr.u) * rn);
  out.dy = norm(wedge(fr.y, rv)) / (norm(fr.y) * rn);
  return out;
}

double local_bound(const Manifold& mf, const Box& b0) {
  const int d = mf.domain_dim(), m = mf.codomain_dim();
  if (b0.dim() != d) throw std::invalid_argument("box dimension != d");
  Box region = b0.scaled(2).intersect(mf.domain());
  const int per_axis = d <= 2 ? 64 : 16;
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  double raw = 0;
  for (;;) {
    for (int i = 0; i < d; ++i)
      x[i] = region.lo[i] + region.side(i) * idx[i] / double(per_axis - 1);
    Jet j = mf.jet(x);
    for (int l = 0; l < m; ++l) {
      raw = std::max(raw, std::fabs(j.f[l]));
      for (int i = 0; i < d; ++i) {
        raw = std::max(raw, std::fabs(j.df[l][i]));
        for (int jj = 0; jj < d; ++jj) raw = std::max(raw, std::fabs(j.d2f[l][i][jj]));
      }
    }
    int axis = 0;
    while (axis < d && ++idx[axis] == per_axis) idx[axis++] = 0;
    if (axis == d) break;
  }
  double corner = 0;
  for (int i = 0; i < d; ++i)
    corner = std::max(corner, std::max(std::fabs(b0.lo[i]), std::fabs(b0.hi[i])));
  double c = std::max(1.25 * raw, 2 * corner);
  return std::max(c, 1.0000001);
}

double eps0_bound(const Manifold& mf, const Box& b0, double C) {
  const int d = mf.domain_dim(), n = mf.ambient_dim();
  return std::min(1.0, b0.inradius()) / (2.0 * d * (n + 1) * (C + 1) * (C + 1));
}

double parameter_step_factor(const Manifold& mf, double C) {
  const int d = mf.domain_dim(), n = mf.ambient_dim();
  double np1 = n + 1.0, cp1 = C + 1.0;
  return 14.0 * np1 * np1 * np1 * cp1 * cp1 * cp1 * cp1 * cp1 * d * d;
}

ParameterStep nearest_parameter(const Manifold& mf, const Box& b0, double C,
                                const std::vector<double>& x,
                                const std::vector<double>& r, double delta,
                                double eps) {
  const int d = mf.domain_dim(), n = mf.ambient_dim();
  ParameterStep out;

  double rn = 0;
  for (double v : r) rn += v * v;
  rn = std::sqrt(rn);
  if (rn == 0) {
    out.reason = "zero point";
    return out;
  }

  double e0 = eps0_bound(mf, b0, C);
  if (!(eps * eps <= delta && delta <= eps && eps <= e0)) {
    out.reason = "window violated: need eps^2 <= delta <= eps <= eps0";
    return out;
  }

  Frame<double> fr = frame_at(mf, x);
  DistanceSplit split = distance_split(fr, r);
  out.dg = split.dg;
  out.du = split.du;
  if (!(split.dg < delta)) {
    out.reason = "normal projection not below delta";
    return out;
  }
  if (!(split.du < eps)) {
    out.reason = "tangential projection not below eps";
    return out;
  }

  const int k = n + 1;
  std::vector<double> rhat(r);
  for (double& v : rhat) v /= rn;
  auto rv = MultiVector<double>::vector(k, rhat);
  auto ru = project(fr.u, rv);

  double align = inner(fr.y, rv);
  if (align == 0) {
    out.reason = "point orthogonal to the frame line";
    return out;
  }
  double eta = align > 0 ? 1.0 : -1.0;

  // Monge structure of V(g)^perp: a member w decomposes over {y, d_i y} and
  // its coefficients read off as c_0 = w_0, c_i = w_i - x_i w_0.
  double lambda0 = ru.coefficients()[0];
  std::vector<double> lambda(d);
  for (int i = 0; i < d; ++i) lambda[i] = ru.coefficients()[1 + i] - x[i] * lambda0;

  double lambda0s = eta / norm(fr.y) + lambda0;
  if (std::fabs(lambda0s) * 2.0 * (n + 1) * C < 1.0) {
    out.reason = "leading coefficient below the size guard";
    return out;
  }

  out.x_new.resize(d);
  for (int i = 0; i < d; ++i) out.x_new[i] = x[i] + lambda[i] / lambda0s;
  if (!b0.scaled(2).contains(out.x_new)) {
    out.reason = "step left the doubled box";
    return out;
  }

  out.guarantee = parameter_step_factor(mf, C) * delta;
  out.accepted = true;
  return out;
}

}  // namespace ratnear
