#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ratnear/cells.hpp"
#include "ratnear/frames.hpp"
#include "ratnear/manifold.hpp"
#include "ratnear/multivector.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace ratnear;

namespace {

// Exact membership of r in the closed body at x, straight from the
// definition.  Shared by the oracle and by validity checks on the points
// the library returns.
bool body_contains(const Frame<Rat>& fr, const std::vector<long long>& r,
                   double psistar, double theta_u, double height) {
  const int k = fr.y.dim();
  std::vector<Rat> rc(k);
  for (int i = 0; i < k; ++i) rc[i] = Rat(r[i]);
  auto rv = MultiVector<Rat>::vector(k, rc);
  Rat ps = scalar_traits<Rat>::from_double(psistar);
  Rat th = scalar_traits<Rat>::from_double(theta_u);
  Rat he = scalar_traits<Rat>::from_double(height);
  if (norm_sq(interior(fr.g, rv)) > ps * ps * norm_sq(fr.g)) return false;
  if (norm_sq(interior(fr.u, rv)) > th * th * norm_sq(fr.u)) return false;
  Rat sy = inner(fr.y, rv);
  return sy * sy <= he * he * norm_sq(fr.y);
}

// Existence oracle: every body point has |r_i| <= height + psistar + theta_u
// (the height piece contributes at most height |y_i| / |y| <= height), so a
// full scan of that cube is complete.
bool oracle_has_point(const Manifold& mf, const std::vector<Rat>& x,
                      double psistar, double theta_u, double height) {
  Frame<Rat> fr = frame_at_exact(mf, x);
  const int k = mf.ambient_dim() + 1;
  const long long R =
      static_cast<long long>(std::floor(height + psistar + theta_u)) + 1;
  std::vector<long long> r(k, -R);
  while (true) {
    bool nonzero = false;
    for (int i = 0; i < k && !nonzero; ++i) nonzero = r[i] != 0;
    if (nonzero && body_contains(fr, r, psistar, theta_u, height)) return true;
    int i = 0;
    for (; i < k; ++i) {
      if (r[i] < R) {
        ++r[i];
        break;
      }
      r[i] = -R;
    }
    if (i == k) break;
  }
  return false;
}

std::vector<Rat> rat_param(int num, int den) { return {Rat(num) / Rat(den)}; }

MultiVector<double> row_vec(const std::vector<double>& row) {
  return MultiVector<double>::vector(static_cast<int>(row.size()), row);
}

double det_n(std::vector<std::vector<double>> a) {
  const int n = static_cast<int>(a.size());
  double det = 1;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (a[piv][c] == 0) return 0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (int r = c + 1; r < n; ++r) {
      double f = a[r][c] / a[c][c];
      for (int j = c; j < n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return det;
}

}  // namespace

TEST_CASE("threshold constant matches the half-ball volumes") {
  CHECK(kappa0(1, 1) == 1.0);
  CHECK(kappa0(1, 2) == doctest::Approx(4 / M_PI));
  CHECK(kappa0(2, 1) == doctest::Approx(4 / M_PI));
  CHECK(kappa0(1, 3) == doctest::Approx(6 / M_PI));
  CHECK(kappa0(2, 2) == doctest::Approx(16 / (M_PI * M_PI)));
  CHECK_THROWS_AS(kappa0(0, 1), std::invalid_argument);
}

TEST_CASE("cell parameters derive the working constants") {
  auto mf = make_parabola();
  Box b0 = Box::interval(-0.5, 0.5);
  const double Qstar = 200, psistar = std::pow(200.0, -0.8), kappa = 0.8, c0 = 2;
  CellParams cp = make_cell_params(*mf, b0, Qstar, psistar, kappa, c0);

  CHECK(cp.theta_u == doctest::Approx(1.0 / (psistar * Qstar)));
  CHECK(cp.delta0 == doctest::Approx(0.4));
  CHECK(cp.Q == doctest::Approx(400.0));
  CHECK(cp.psi == doctest::Approx(c0 / (kappa * kappa) * psistar));
  // rho is the tangential radius shrunk by the height scale.
  CHECK(cp.rho == doctest::Approx(c0 / (kappa * kappa) * cp.theta_u / Qstar));

  // kappa beyond the threshold constant.
  CHECK_THROWS_AS(make_cell_params(*mf, b0, Qstar, psistar, 1.5, c0),
                  std::invalid_argument);
  // weight above 1 or below the admissible floor kappa^(-1/3) / Qstar.
  CHECK_THROWS_AS(make_cell_params(*mf, b0, Qstar, 1.2, kappa, c0),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_cell_params(*mf, b0, Qstar, 0.9 / Qstar, kappa, c0),
                  std::invalid_argument);
  // size rules: the default one needs Qstar >= c0^2 / (kappa^4 inradius).
  CHECK_THROWS_AS(make_cell_params(*mf, b0, 15, 0.5, kappa, c0),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_cell_params(*mf, b0, 30, 0.5, kappa, c0, true),
                  std::invalid_argument);
  CHECK_NOTHROW(make_cell_params(*mf, b0, 40, 0.5, kappa, c0, true));
}

TEST_CASE("integer point search agrees with the full cube scan") {
  std::mt19937_64 rng(771220);
  auto pick = [&](double a, double b) {
    return a + (b - a) * std::uniform_real_distribution<double>(0, 1)(rng);
  };

  auto parabola = make_parabola();
  int found_cnt = 0, empty_cnt = 0;
  for (int it = 0; it < 14; ++it) {
    std::vector<Rat> x = rat_param(int(rng() % 115) - 57, 64);
    double Qstar = pick(4, 9);
    double kappa = pick(0.15, 1.0);
    double lo = std::pow(kappa, -1.0 / 3) / Qstar;
    double psistar = std::min(1.0, lo * pick(1.0, 2.5));
    double theta_u = 1.0 / (psistar * Qstar);
    double height = kappa * Qstar;

    BodySolution sol = find_integer_point(*parabola, x, psistar, theta_u, height);
    bool oracle = oracle_has_point(*parabola, x, psistar, theta_u, height);
    REQUIRE(sol.found == oracle);
    if (sol.found) {
      ++found_cnt;
      Frame<Rat> fr = frame_at_exact(*parabola, x);
      CHECK(body_contains(fr, sol.r, psistar, theta_u, height));
    } else {
      ++empty_cnt;
    }
  }
  // The draw must exercise both outcomes to mean anything.
  CHECK(found_cnt >= 3);
  CHECK(empty_cnt >= 3);

  auto veronese = make_veronese(3);
  for (int it = 0; it < 3; ++it) {
    std::vector<Rat> x = rat_param(int(rng() % 115) - 57, 64);
    double Qstar = pick(3, 5);
    double kappa = pick(0.3, 0.8) * kappa0(1, 3);
    double lo = std::pow(kappa, -1.0 / 5) * std::pow(Qstar, -3.0 / 5);
    double psistar = std::min(1.0, lo * pick(1.0, 1.8));
    double theta_u = 1.0 / (std::pow(psistar, 3) * Qstar);
    double height = kappa * Qstar;

    BodySolution sol = find_integer_point(*veronese, x, psistar, theta_u, height);
    CHECK(sol.found == oracle_has_point(*veronese, x, psistar, theta_u, height));
    if (sol.found) {
      Frame<Rat> fr = frame_at_exact(*veronese, x);
      CHECK(body_contains(fr, sol.r, psistar, theta_u, height));
    }
  }
}

TEST_CASE("threshold-volume bodies always hold a lattice point") {
  std::mt19937_64 rng(8255031);
  auto pick = [&](double a, double b) {
    return a + (b - a) * std::uniform_real_distribution<double>(0, 1)(rng);
  };

  auto parabola = make_parabola();
  const double k2 = kappa0(1, 1);
  for (int it = 0; it < 40; ++it) {
    std::vector<Rat> x = rat_param(int(rng() % 115) - 57, 64);
    double Qstar = pick(5, 40);
    double lo = std::pow(k2, -1.0 / 3) / Qstar;
    double psistar = std::exp(pick(std::log(lo), 0.0));
    double theta_u = 1.0 / (psistar * Qstar);
    BodySolution sol = find_integer_point(*parabola, x, psistar, theta_u, k2 * Qstar);
    REQUIRE(sol.found);
    CHECK(body_contains(frame_at_exact(*parabola, x), sol.r, psistar, theta_u,
                        k2 * Qstar));
  }

  auto veronese = make_veronese(3);
  const double k4 = kappa0(1, 3);
  for (int it = 0; it < 20; ++it) {
    std::vector<Rat> x = rat_param(int(rng() % 115) - 57, 64);
    double Qstar = pick(4, 12);
    double lo = std::pow(k4, -1.0 / 5) * std::pow(Qstar, -3.0 / 5);
    double psistar = std::exp(pick(std::log(lo), 0.0));
    double theta_u = 1.0 / (std::pow(psistar, 3) * Qstar);
    BodySolution sol = find_integer_point(*veronese, x, psistar, theta_u, k4 * Qstar);
    REQUIRE(sol.found);
    CHECK(body_contains(frame_at_exact(*veronese, x), sol.r, psistar, theta_u,
                        k4 * Qstar));
  }
}

TEST_CASE("detection lands on a nearby rational point with the stated scales") {
  auto mf = make_parabola();
  Box b0 = Box::interval(-0.5, 0.5);
  const double Qstar = 1000, psistar = std::pow(Qstar, -0.8), kappa = 0.3, c0 = 2;
  CellParams cp = make_cell_params(*mf, b0, Qstar, psistar, kappa, c0);

  // The lift of x = 0 is (1, 0, 0): r = (1, 0, 0) sits in every body, so 0
  // is never good and detection must refuse it.
  CHECK_FALSE(good_set_member(*mf, cp, rat_param(0, 1)));
  CHECK_THROWS_AS(detect(*mf, cp, rat_param(0, 1)), std::invalid_argument);

  int good = 0, tall = 0;
  double worst_q_ratio = 10;
  for (int i = -64; i <= 64; ++i) {
    std::vector<Rat> x = rat_param(i, 128);
    if (!good_set_member(*mf, cp, x)) continue;
    ++good;
    Detection det = detect(*mf, cp, x);
    REQUIRE(det.point.q >= 1);
    CHECK(det.point.q <= cp.Q);
    long long g = det.point.q;
    for (long long v : det.point.a) g = std::gcd(g, v < 0 ? -v : v);
    for (long long v : det.point.b) g = std::gcd(g, v < 0 ? -v : v);
    CHECK(g == 1);

    // Exact versions of the reported distances against the derived scales.
    Rat dx = scalar_traits<Rat>::abs(x[0] - Rat(det.point.a[0]) / Rat(det.point.q));
    CHECK(dx < scalar_traits<Rat>::from_double(cp.rho));
    CHECK(residual_exact(*mf, det.point) < scalar_traits<Rat>::from_double(cp.psi));
    CHECK(det.param_dist == doctest::Approx(scalar_traits<Rat>::to_double(dx)));

    double ratio = static_cast<double>(det.point.q) / (cp.delta0 * cp.Q);
    worst_q_ratio = std::min(worst_q_ratio, ratio);
    if (ratio >= 1) ++tall;
  }
  // Goodness is the exception, not the rule: the kappa-body still catches
  // most parameters at this volume, and x = 0 never escapes it.
  CHECK(good >= 15);
  CHECK(good <= 80);
  // The height of the detected point tracks delta0 Q up to the norm of the
  // lift, which stays below sqrt(1 + x^2 + x^4) <= 1.146 on the half box.
  CHECK(worst_q_ratio > 0.8);
  CHECK(tall >= good / 2);
  MESSAGE("good grid points: ", good, ", min q / (delta0 Q): ", worst_q_ratio);
}

TEST_CASE("adapted rows stay in their frame blocks with unit size") {
  auto mf = make_parabola();
  auto rows0 = adapted_matrix(*mf, {0.2}, {0.2});
  REQUIRE(rows0.size() == 3);
  for (size_t i = 0; i < rows0.size(); ++i) {
    CHECK(norm(row_vec(rows0[i])) == doctest::Approx(0.5));
    for (size_t j = i + 1; j < rows0.size(); ++j)
      CHECK(std::fabs(inner(row_vec(rows0[i]), row_vec(rows0[j]))) < 1e-12);
  }

  auto rows = adapted_matrix(*mf, {0.2}, {0.26});
  Frame<double> fx = frame_at(*mf, {0.26});
  CHECK(span_membership(fx.g, row_vec(rows[0]), 1e-8));
  CHECK(span_membership(fx.u, row_vec(rows[1]), 1e-8));
  CHECK(span_membership(fx.y, row_vec(rows[2]), 1e-8));
  for (const auto& row : rows) {
    CHECK(norm(row_vec(row)) <= 1.0);
    CHECK(norm(row_vec(row)) > 0.4);
  }
  CHECK(std::fabs(det_n(rows)) > 0.05);

  auto v3 = make_veronese(3);
  auto rows4 = adapted_matrix(*v3, {0.1}, {0.13});
  REQUIRE(rows4.size() == 4);
  Frame<double> f4 = frame_at(*v3, {0.13});
  CHECK(span_membership(f4.g, row_vec(rows4[0]), 1e-8));
  CHECK(span_membership(f4.g, row_vec(rows4[1]), 1e-8));
  CHECK(span_membership(f4.u, row_vec(rows4[2]), 1e-8));
  CHECK(span_membership(f4.y, row_vec(rows4[3]), 1e-8));
  for (const auto& row : rows4) CHECK(norm(row_vec(row)) <= 1.0);
  CHECK(std::fabs(det_n(rows4)) > 0.02);
}

TEST_CASE("weight profile lists the body radii in row order") {
  auto mf = make_parabola();
  Box b0 = Box::interval(-0.5, 0.5);
  const double Qstar = 200, psistar = std::pow(200.0, -0.8), kappa = 0.8;
  CellParams cp = make_cell_params(*mf, b0, Qstar, psistar, kappa, 2);
  ThetaProfile tp = theta_profile(*mf, cp);

  REQUIRE(tp.theta.size() == 3);
  CHECK(tp.theta[0] == doctest::Approx(psistar));
  CHECK(tp.theta[1] == doctest::Approx(cp.theta_u));
  CHECK(tp.theta[2] == doctest::Approx(kappa * Qstar));
  CHECK(tp.theta[0] * tp.theta[1] * tp.theta[2] == doctest::Approx(kappa));
  CHECK(std::pow(tp.theta_scalar, 3) == doctest::Approx(kappa));
  CHECK(tp.cstar == doctest::Approx(psistar * Qstar));
  CHECK(tp.theta_hat_bound == doctest::Approx(std::pow(kappa * tp.cstar, -1.0 / 3)));

  // A weight at exactly 1/Qstar pins the profile constant to 1.
  CellParams flat = cp;
  flat.psistar = 1.0 / Qstar;
  CHECK_THROWS_AS(theta_profile(*mf, flat), std::invalid_argument);
}

TEST_CASE("default driving constant freezes on the parabola") {
  auto mf = make_parabola();
  Box b0 = Box::interval(-0.5, 0.5);
  double C = local_bound(*mf, b0);
  REQUIRE(C == 2.5);
  // The binding term is 6 K (kappa0 + 1) (n+1)^2 C^2 with K the parameter
  // step factor 14 * 27 * 3.5^5.
  CHECK(default_c0(*mf, b0, C) == doctest::Approx(134009564.0625));
  CHECK(kappa_for_goodness(2, 0.5, 2) == doctest::Approx(std::pow(8.0, -6.0)));
  CHECK_THROWS_AS(kappa_for_goodness(-1, 0.5, 2), std::invalid_argument);
}
