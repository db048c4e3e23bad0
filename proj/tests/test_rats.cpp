#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ratnear/rats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace ratnear;

namespace {

// Brute-force listing for polynomial curves: full scans with per-candidate
// exact residual arithmetic, no windowing, no shared code with the library
// enumeration (other than the Rat type itself).
std::vector<RationalPoint> oracle_enumerate(const Manifold& mf, const Box& B, long long Q,
                                            double delta, double psi) {
  std::vector<RationalPoint> out;
  const Rat psi_r(psi);
  const Rat lo(B.lo[0]), hi(B.hi[0]);
  const int m = mf.codomain_dim();
  for (long long q = 1; q <= Q; ++q) {
    if (!(q > delta * Q)) continue;
    for (long long a = -4 * q; a <= 4 * q; ++a) {
      Rat x(a, q);
      if (x < lo || x > hi) continue;
      std::vector<Rat> f = mf.eval_exact({x});
      std::vector<std::vector<long long>> choices(m);
      for (int l = 0; l < m; ++l)
        for (long long b = -6 * q; b <= 6 * q; ++b) {
          Rat res = Rat(q) * f[l] - Rat(b);
          if (res < 0) res = -res;
          if (res <= psi_r) choices[l].push_back(b);
        }
      std::vector<size_t> pick(m, 0);
      bool any = true;
      for (int l = 0; l < m; ++l)
        if (choices[l].empty()) any = false;
      while (any) {
        RationalPoint p{q, {a}, {}};
        for (int l = 0; l < m; ++l) p.b.push_back(choices[l][pick[l]]);
        long long g = std::gcd(q, std::llabs(a));
        for (long long v : p.b) g = std::gcd(g, std::llabs(v));
        if (g == 1) out.push_back(std::move(p));
        size_t i = 0;
        while (i < pick.size() && ++pick[i] == choices[i].size()) pick[i++] = 0;
        if (i == pick.size()) break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Dense-grid distance classifier for the parabola, independent of the
// window minimizer: 4097 samples over the whole box, golden refinement.
int oracle_classify(double pa, double pb, const Box& B, double eps) {
  auto F = [&](double x) {
    double t = x * x - pb;
    return (x - pa) * (x - pa) + t * t;
  };
  const int G = 4096;
  double best = HUGE_VAL, bx = B.lo[0];
  for (int i = 0; i <= G; ++i) {
    double x = B.lo[0] + B.side(0) * i / G;
    double v = F(x);
    if (v < best) {
      best = v;
      bx = x;
    }
  }
  double a = std::max(B.lo[0], bx - B.side(0) / G);
  double b = std::min(B.hi[0], bx + B.side(0) / G);
  for (int it = 0; it < 80; ++it) {
    double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
    if (F(m1) < F(m2))
      b = m2;
    else
      a = m1;
  }
  double dist = std::sqrt(std::min(best, F(0.5 * (a + b))));
  if (dist <= eps * (1 - 1e-6)) return 1;
  if (dist < eps * (1 + 1e-6)) return 0;
  return -1;
}

}  // namespace

TEST_CASE("small parabola listing is exactly the two known points") {
  auto mf = make_parabola();
  auto pts = enumerate_R(*mf, Box::interval(0, 1), 3, 0, 0.3);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0] == RationalPoint{1, {0}, {0}});
  CHECK(pts[1] == RationalPoint{1, {1}, {1}});
}

TEST_CASE("enumeration matches the exhaustive oracle") {
  auto parabola = make_parabola();
  auto fast = enumerate_R(*parabola, Box::interval(-1, 1), 25, 0, 0.15);
  auto slow = oracle_enumerate(*parabola, Box::interval(-1, 1), 25, 0, 0.15);
  CHECK(fast == slow);
  CHECK(fast.size() > 10);  // the check should not pass vacuously

  auto v3 = make_veronese(3);
  Box B = v3->domain();
  auto fast3 = enumerate_R(*v3, B, 12, 0.3, 0.4);
  auto slow3 = oracle_enumerate(*v3, B, 12, 0.3, 0.4);
  CHECK(fast3 == slow3);
  for (const auto& p : fast3) {
    CHECK(p.q > 0.3 * 12);
    CHECK(residual_exact(*v3, p) <= Rat(2, 5));
  }
}

TEST_CASE("exact residuals at hand-computed points") {
  auto parabola = make_parabola();
  CHECK(residual_exact(*parabola, {3, {1}, {0}}) == Rat(1, 3));
  auto v3 = make_veronese(3);
  CHECK(residual_exact(*v3, {2, {1}, {1, 1}}) == Rat(3, 4));
  auto circle = make_circle(3);
  CHECK(residual(*circle, {1, {0}, {2}}) ==
        doctest::Approx(2 - std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("circle counts are exact on pythagorean data") {
  auto c1 = make_circle(1);
  Box B = c1->domain();  // [-1/2, 1/2]
  // On the unit circle with q <= 13 and |a/q| <= 1/2: (0,1,1) and (+-5,12,13).
  NearCount n13 = count_N(*c1, B, 13, 1e-9);
  CHECK(n13.accepted == 3);
  CHECK(n13.ambiguous == 0);
  NearCount n12 = count_N(*c1, B, 12, 1e-9);
  CHECK(n12.accepted == 1);
  // (6,8,10) reduces to (3,4,5) which projects outside the box; nothing new
  // appears between 5 and 13 even though 10 admits a scaled triple.
  NearCount n10 = count_N(*c1, B, 10, 1e-9);
  CHECK(n10.accepted == 1);

  // 3 q^2 = a^2 + b^2 has no integer solutions, and at this tolerance any
  // accepted point would have to solve it.
  auto c3 = make_circle(3);
  NearCount none = count_N(*c3, c3->domain(), 50, 1e-4);
  CHECK(none.accepted == 0);
  CHECK(none.ambiguous == 0);
}

TEST_CASE("curve counting agrees with the dense-grid oracle") {
  auto mf = make_parabola();
  Box B = mf->domain();
  const double eps = 0.05;
  const long long Q = 40;
  NearCount fast = count_N(*mf, B, Q, eps, 2);

  long long accepted = 0, ambiguous = 0;
  for (long long q = 1; q <= Q; ++q)
    for (long long a = -(long long)std::ceil(q * (1 + eps)); a <= (long long)(q * (1 + eps)); ++a)
      for (long long b = -(long long)std::ceil(q * eps) - 1; b <= (long long)(q * (1 + eps)) + 1; ++b) {
        if (std::gcd(std::gcd(q, std::llabs(a)), std::llabs(b)) != 1) continue;
        int cls = oracle_classify(double(a) / q, double(b) / q, B, eps);
        if (cls > 0) ++accepted;
        if (cls == 0) ++ambiguous;
      }
  CHECK(fast.accepted == accepted);
  CHECK(fast.ambiguous == ambiguous);
  CHECK(accepted > 50);
}

TEST_CASE("boundary-distance points land in the ambiguous tally") {
  auto mf = make_parabola();
  // (0, -1/4) and (1, 5/4) sit at distance exactly 1/4 from the graph
  // over [0, 1].
  NearCount n = count_N(*mf, Box::interval(0, 1), 4, 0.25);
  CHECK(n.ambiguous >= 2);
}

TEST_CASE("coverage fractions on hand-checkable layouts") {
  CHECK(coverage_measure({{0.5}}, 0.6, Box::interval(0, 1)) == 1.0);
  CHECK(coverage_measure({{0.25}, {0.75}}, 0.05, Box::interval(0, 1)) ==
        doctest::Approx(0.2).epsilon(1e-12));
  CHECK(coverage_measure({}, 0.1, Box::interval(0, 1)) == 0.0);
  // Two dimensions: one ball around the center of the unit square.
  double frac = coverage_measure({{0.5, 0.5}}, 0.25,
                                 Box({0, 0}, {1, 1}));
  CHECK(frac == doctest::Approx(3.14159 * 0.25 * 0.25).epsilon(0.02));
}

TEST_CASE("log-log fit recovers a clean power law") {
  std::vector<double> xs{10, 20, 40, 80}, ys;
  for (double x : xs) ys.push_back(7 * std::pow(x, 2.5));
  ExponentFit fit = exponent_fit(xs, ys);
  CHECK(fit.slope == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-10));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.slope_stderr < 1e-6);
  CHECK_THROWS_AS(exponent_fit({1, 2}, {0, 3}), std::invalid_argument);
}

TEST_CASE("threaded runs reproduce the single-thread answer") {
  auto mf = make_parabola();
  auto one = enumerate_R(*mf, mf->domain(), 60, 0.2, 0.2, 1);
  auto four = enumerate_R(*mf, mf->domain(), 60, 0.2, 0.2, 4);
  CHECK(one == four);

  NearCount c1 = count_N(*mf, mf->domain(), 30, 0.04, 1);
  NearCount c3 = count_N(*mf, mf->domain(), 30, 0.04, 3);
  CHECK(c1.accepted == c3.accepted);
  CHECK(c1.ambiguous == c3.ambiguous);
}
