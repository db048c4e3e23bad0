// Axis-aligned boxes used as manifold domains and search regions.

#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace ratnear {

struct Box {
  std::vector<double> lo, hi;

  Box() = default;
  Box(std::vector<double> l, std::vector<double> h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size()) throw std::invalid_argument("box bound size mismatch");
    for (size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] <= hi[i])) throw std::invalid_argument("box has lo > hi");
  }
  static Box interval(double a, double b) { return Box({a}, {b}); }

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const std::vector<double>& x) const {
    if (x.size() != lo.size()) return false;
    for (size_t i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }

  double side(int i) const { return hi[i] - lo[i]; }

  double min_side() const {
    double s = side(0);
    for (int i = 1; i < dim(); ++i) s = std::min(s, side(i));
    return s;
  }

  double volume() const {
    double v = 1;
    for (int i = 0; i < dim(); ++i) v *= side(i);
    return v;
  }

  std::vector<double> center() const {
    std::vector<double> c(lo.size());
    for (size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
  }

  // Largest radius r such that the ball B(center, r) sits inside the box.
  double inradius() const { return 0.5 * min_side(); }

  // Box scaled by factor t about its center.
  Box scaled(double t) const {
    std::vector<double> l(lo.size()), h(lo.size());
    for (size_t i = 0; i < lo.size(); ++i) {
      double c = 0.5 * (lo[i] + hi[i]), r = 0.5 * t * (hi[i] - lo[i]);
      l[i] = c - r;
      h[i] = c + r;
    }
    return Box(std::move(l), std::move(h));
  }

  Box intersect(const Box& other) const {
    std::vector<double> l(lo.size()), h(lo.size());
    for (size_t i = 0; i < lo.size(); ++i) {
      l[i] = std::max(lo[i], other.lo[i]);
      h[i] = std::min(hi[i], other.hi[i]);
      if (l[i] > h[i]) { l[i] = h[i] = 0; }  // empty, collapse to a point
    }
    return Box(std::move(l), std::move(h));
  }
};

}  // namespace ratnear
