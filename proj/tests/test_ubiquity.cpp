// Resonant pair levels, coverage fractions, transfer of near-hits into
// full solutions, and box-counting dimension estimates.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ratnear/manifold.hpp"
#include "ratnear/rats.hpp"
#include "ratnear/ubiquity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace ratnear;

namespace {

double power_law(double q) { return std::pow(q, -0.8); }

// Distinct boxes of size s holding a rational point of the unit circle
// with q <= Q, found by a perfect-square scan instead of the coprime
// parameterization.
long long brute_circle_boxes(const Box& B, long long Q, double s) {
  std::vector<long long> idx;
  for (long long q = 1; q <= Q; ++q) {
    for (long long a = -q; a <= q; ++a) {
      const double x = double(a) / double(q);
      if (x < B.lo[0] || x > B.hi[0]) continue;
      const long long bb = q * q - a * a;
      const long long r = std::llround(std::sqrt(double(bb)));
      bool on = false;
      for (long long c = std::max<long long>(1, r - 2); c <= r + 2; ++c)
        if (c * c == bb) on = true;
      if (on) idx.push_back(static_cast<long long>(std::floor((x - B.lo[0]) / s)));
    }
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return static_cast<long long>(idx.size());
}

}  // namespace

TEST_CASE("levels grow with the scale and match the straight scan") {
  auto par = make_parabola();
  ResonantSystem rs(*par, par->domain(), power_law, 1.0);

  auto m4 = rs.members(4);
  auto m6 = rs.members(6);
  auto m7 = rs.members(7);
  CHECK(std::is_sorted(m6.begin(), m6.end()));
  CHECK(m6.size() > m4.size());
  CHECK(m7.size() > m6.size());
  CHECK(std::includes(m7.begin(), m7.end(), m6.begin(), m6.end()));
  CHECK(rs.members(6, 3) == m6);
  CHECK(rs.members(6, 8) == m6);

  // Independent scan of the level-4 criterion with exact arithmetic.
  std::vector<RationalPoint> brute;
  for (long long q = 1; q <= 16; ++q) {
    const Rat th = scalar_traits<Rat>::from_double(0.5 * power_law(double(q)));
    for (long long a = -q; a <= q; ++a) {
      Rat c = Rat(a * a, q);  // q * (a/q)^2
      long long b = static_cast<long long>(std::llround(double(a * a) / double(q)));
      Rat r = c - b;
      if (r < 0) r = -r;
      if (r <= th) brute.push_back({q, {a}, {b}});
    }
  }
  REQUIRE(m4.size() == brute.size());
  CHECK(m4 == brute);

  // Every reported member satisfies the exact residual bound.
  for (const auto& p : m6) {
    CHECK(p.q <= 64);
    CHECK(residual_exact(*par, p) <= scalar_traits<Rat>::from_double(0.5 * power_law(double(p.q))));
  }

  CHECK_THROWS_AS(rs.members(0), std::invalid_argument);
  CHECK_THROWS_AS(rs.members(21), std::invalid_argument);
  CHECK_THROWS_AS(ResonantSystem(*par, Box::interval(-2, 2), power_law, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ResonantSystem(*par, par->domain(), power_law, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ResonantSystem(*par, par->domain(), [](double) { return 0.0; }, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ResonantSystem(*par, Box({-0.5, -0.5}, {0.5, 0.5}), power_law, 1.0),
                  std::invalid_argument);
}

TEST_CASE("constant thresholds flood the box at the first level") {
  auto par = make_parabola();
  ResonantSystem rs(*par, par->domain(), [](double) { return 10.0; }, 10.0);
  CHECK(rs.rho(2.0) == doctest::Approx(0.25));
  // Centers {0, +-1/2, +-1} with balls of radius 1/4 tile [-1, 1] completely.
  CHECK(ubiquity_fraction(rs, 1, Box::interval(-1, 1)) == 1.0);
}

TEST_CASE("power-law thresholds keep a positive covered fraction") {
  auto par = make_parabola();
  ResonantSystem rs(*par, par->domain(), power_law, 1.0);
  const Box B = Box::interval(-0.5, 0.5);

  // The radius rule shrinks as the level grows.
  CHECK(rs.rho(64.0) > rs.rho(128.0));

  const std::vector<double> frozen{0.696805, 0.788040, 0.824765, 0.830052, 0.819141};
  for (int t = 6; t <= 10; ++t) {
    const double f = ubiquity_fraction(rs, t, B, 0, 0, 3);
    CAPTURE(t);
    CHECK(f >= 0.65);                    // pinned floor
    CHECK(f >= coverage_floor(1));       // comfortably above the guaranteed 1/4
    CHECK(f == doctest::Approx(frozen[t - 6]).epsilon(1e-3));
    CHECK(f <= 1.0);
  }

  // Coarse grids are rejected, fine explicit grids agree across threads.
  const double rho6 = rs.rho(64.0);
  CHECK_THROWS_AS(ubiquity_fraction(rs, 6, B, 0, rho6 / 5), std::invalid_argument);
  CHECK(ubiquity_fraction(rs, 6, B, 0, rho6 / 12, 1) ==
        ubiquity_fraction(rs, 6, B, 0, rho6 / 12, 4));
}

TEST_CASE("restricting to certified denominators can only lose coverage") {
  auto par = make_parabola();
  ResonantSystem rs(*par, par->domain(), power_law, 1.0);
  const Box B = Box::interval(-0.5, 0.5);
  const int t = 8;
  const double Q = 256;

  const double full = ubiquity_fraction(rs, t, B, 0, 0, 3);
  const double restricted = ubiquity_fraction(rs, t, B, Q / 4, 0, 3);
  CHECK(restricted > 0.5);
  CHECK(restricted <= full);
  CHECK(full == doctest::Approx(0.824765).epsilon(1e-3));
  CHECK(restricted == doctest::Approx(0.731736).epsilon(1e-3));

  // The same containment holds against the primitive enumeration run with
  // the constant level-Q threshold, whose pairs form a subset of the level
  // members because the threshold rule is non-increasing.
  auto prim = enumerate_R(*par, par->domain(), Q, 0.25, 0.5 * power_law(Q));
  CHECK(!prim.empty());
  std::vector<std::vector<double>> centers;
  for (const auto& p : prim) centers.push_back({double(p.a[0]) / double(p.q)});
  const double delta_fraction = coverage_measure(centers, rs.rho(Q), B);
  CHECK(delta_fraction > 0);
  CHECK(delta_fraction <= full);
}

TEST_CASE("near-hits carry full solutions in a shrunken window") {
  auto par = make_parabola();
  ResonantSystem rs(*par, par->domain(), power_law, 1.0);
  auto rep = transfer_check(rs, 6, 5, 12345);
  CHECK(rep.samples == 5 * static_cast<long long>(rs.members(6).size()));
  CHECK(rep.violations == 0);
  CHECK(rep.worst_margin < 1.0);

  auto circ3 = make_circle(3);
  ResonantSystem rs3(*circ3, circ3->domain(), [](double q) { return 1.0 / q; }, 1.0);
  auto rep3 = transfer_check(rs3, 4, 50, 7);
  CHECK(rep3.samples > 0);
  CHECK(rep3.violations == 0);
  CHECK(rep3.worst_margin < 1.0);

  CHECK_THROWS_AS(transfer_check(rs, 6, 0, 1), std::invalid_argument);
}

TEST_CASE("box-counting slope of the unit circle meets the known exponent") {
  auto circ = make_circle(1);
  const auto est = dim_estimate(*circ, 1.5, {64, 128, 256, 512, 1024});
  REQUIRE(est.scales.size() == 5);
  CHECK(est.counts.front() == 13);
  for (size_t i = 0; i + 1 < est.counts.size(); ++i) CHECK(est.counts[i] < est.counts[i + 1]);

  // The coprime-parameterization census agrees with a perfect-square scan.
  for (size_t i = 0; i < 2; ++i) {
    const long long Q = i == 0 ? 64 : 128;
    CHECK(est.counts[i] == brute_circle_boxes(circ->domain(), Q, est.scales[i]));
  }

  CHECK(est.reliable);
  CHECK(est.r2 >= 0.95);
  CHECK(std::fabs(est.dimension - 1.0 / 2.5) <= 0.12);
  MESSAGE("circle dimension ", est.dimension, " vs 0.4, r2 ", est.r2);
}

TEST_CASE("box-counting slope of the parabola meets the known exponent") {
  auto par = make_parabola();
  const auto est = dim_estimate(*par, 0.75, {64, 128, 256, 512, 1024}, Box(), 3);
  CHECK(est.reliable);
  CHECK(est.r2 >= 0.95);
  CHECK(std::fabs(est.dimension - 5.0 / 7.0) <= 0.12);
  CHECK(est.dimension >= 0);
  CHECK(est.dimension <= 1);
  CHECK(est.confidence < 0.1);
  MESSAGE("parabola dimension ", est.dimension, " vs ", 5.0 / 7.0, ", r2 ", est.r2);

  // Thread count does not move the estimate.
  const auto again = dim_estimate(*par, 0.75, {64, 128, 256, 512, 1024}, Box(), 1);
  CHECK(again.dimension == est.dimension);
  CHECK(again.counts == est.counts);
}

TEST_CASE("insoluble circles starve the hit set") {
  auto circ3 = make_circle(3);
  // 3 q^2 = a^2 + b^2 has no integer solutions, so only the lone accidental
  // near-hit at q = 1 survives and the count freezes.
  const auto est = dim_estimate(*circ3, 1.5, {64, 128, 256, 512});
  CHECK(est.counts == std::vector<long long>{1, 1, 1, 1});
  CHECK(est.dimension == 0.0);
  CHECK(est.slope == 0.0);

  CHECK_THROWS_AS(dim_estimate(*circ3, 1.5, {8, 16, 32, 64}, Box::interval(0.3, 0.4)),
                  std::runtime_error);
}

TEST_CASE("estimator rejects malformed requests") {
  auto par = make_parabola();
  CHECK_THROWS_AS(dim_estimate(*par, 0.0, {8, 16, 32, 64}), std::invalid_argument);
  CHECK_THROWS_AS(dim_estimate(*par, 0.75, {8, 16, 32}), std::invalid_argument);
  CHECK_THROWS_AS(dim_estimate(*par, 0.75, {8, 32, 16, 64}), std::invalid_argument);
  CHECK_THROWS_AS(dim_estimate(*par, 0.75, {0.5, 16, 32, 64}), std::invalid_argument);
  auto block = make_power_block(2, 2, 1);
  CHECK_THROWS_AS(dim_estimate(*block, 0.75, {8, 16, 32, 64}), std::invalid_argument);
  CHECK_THROWS_AS(dim_estimate(*par, 0.75, {8, 16, 32, 64}, Box({0, 0}, {1, 1})),
                  std::invalid_argument);
}

TEST_CASE("detection constants induce the coverage defaults") {
  CHECK(coverage_floor(1) == 0.25);
  CHECK(coverage_floor(2) == 0.125);
  CHECK_THROWS_AS(coverage_floor(0), std::invalid_argument);

  CHECK(detection_rho0(1.0, 0.5, 2, 1) == doctest::Approx(16.0));
  CHECK(detection_rho0(2.0, 1.0, 3, 1) == doctest::Approx(32.0));
  CHECK(detection_rho0(1.0, 0.4, 2, 1) > detection_rho0(1.0, 0.5, 2, 1));
  CHECK_THROWS_AS(detection_rho0(0.5, 0.5, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(detection_rho0(1.0, 0.0, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(detection_rho0(1.0, 0.5, 1, 1), std::invalid_argument);

  // A larger radius multiplier cannot shrink the covered fraction when both
  // runs share one grid.
  auto par = make_parabola();
  const Box B = Box::interval(-0.5, 0.5);
  ResonantSystem one(*par, par->domain(), power_law, 1.0);
  ResonantSystem two(*par, par->domain(), power_law, 2.0);
  const double h = one.rho(64.0) / 10;
  CHECK(ubiquity_fraction(two, 6, B, 0, h) >= ubiquity_fraction(one, 6, B, 0, h));
}
