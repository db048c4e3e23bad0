#include "ratnear/ubiquity.hpp"

#include "ratnear/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ratnear {
namespace {

long long floor_rat(const Rat& x) {
  BigInt n = boost::multiprecision::numerator(x);
  BigInt d = boost::multiprecision::denominator(x);
  BigInt q = n / d;  // truncates toward zero
  if (n < 0 && q * d != n) q -= 1;
  return q.convert_to<long long>();
}

long long ceil_rat(const Rat& x) { return -floor_rat(-x); }

long long nearest_rat(const Rat& x) { return floor_rat(x + Rat(1, 2)); }

// Steps a multi-index through [lo_i, hi_i]; returns false when exhausted.
bool advance(std::vector<long long>& v, const std::vector<long long>& lo,
             const std::vector<long long>& hi) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (++v[i] <= hi[i]) return true;
    v[i] = lo[i];
  }
  return false;
}

// All pairs (q, a) with 1 <= q <= qmax, a/q in B and residual at most
// half_threshold(q), each completed by the nearest integer vector b.  The
// q range is chunked, so the merged output stays in (q, a) order for any
// thread count.
std::vector<RationalPoint> near_pairs(const Manifold& mf, const Box& B, long long qmax,
                                      const std::function<double(long long)>& half_threshold,
                                      int threads) {
  const int d = mf.domain_dim(), m = mf.codomain_dim();
  std::vector<Rat> box_lo(d), box_hi(d);
  for (int i = 0; i < d; ++i) {
    box_lo[i] = scalar_traits<Rat>::from_double(B.lo[i]);
    box_hi[i] = scalar_traits<Rat>::from_double(B.hi[i]);
  }

  const int chunks = std::max(1, threads);
  std::vector<std::vector<RationalPoint>> partial(chunks);
  run_chunked(1, qmax + 1, threads, [&](int chunk, long long q0, long long q1) {
    auto& out = partial[chunk];
    std::vector<long long> alo(d), ahi(d), a(d), b(m);
    std::vector<Rat> x(d);
    std::vector<double> xd(d);
    for (long long q = q0; q < q1; ++q) {
      const double th = half_threshold(q);
      if (!(th >= 0)) continue;
      bool empty_range = false;
      for (int i = 0; i < d; ++i) {
        alo[i] = ceil_rat(Rat(q) * box_lo[i]);
        ahi[i] = floor_rat(Rat(q) * box_hi[i]);
        if (alo[i] > ahi[i]) empty_range = true;
      }
      if (empty_range) continue;
      const Rat th_r = scalar_traits<Rat>::from_double(th);
      a = alo;
      do {
        bool ok = true;
        if (mf.polynomial()) {
          for (int i = 0; i < d; ++i) x[i] = Rat(a[i], q);
          std::vector<Rat> f = mf.eval_exact(x);
          for (int l = 0; l < m && ok; ++l) {
            Rat c = Rat(q) * f[l];
            b[l] = nearest_rat(c);
            Rat r = c - b[l];
            if (r < 0) r = -r;
            ok = r <= th_r;
          }
        } else {
          for (int i = 0; i < d; ++i) xd[i] = double(a[i]) / double(q);
          std::vector<double> f = mf.eval(xd);
          for (int l = 0; l < m && ok; ++l) {
            double c = q * f[l];
            b[l] = std::llround(c);
            ok = std::fabs(c - double(b[l])) <= th;
          }
        }
        if (ok) out.push_back({q, a, b});
      } while (advance(a, alo, ahi));
    }
  });

  std::vector<RationalPoint> all;
  for (auto& part : partial) {
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return all;
}

// Midpoint-rule fraction of B covered by Euclidean balls of radius rho.
double covered_fraction(const std::vector<std::vector<double>>& centers, double rho,
                        const Box& B, double h) {
  const int d = B.dim();
  std::vector<long long> counts(d);
  long long total = 1;
  for (int i = 0; i < d; ++i) {
    counts[i] = std::max<long long>(1, static_cast<long long>(std::ceil(B.side(i) / h)));
    total *= counts[i];
  }

  if (d == 1) {
    std::vector<double> xs;
    xs.reserve(centers.size());
    for (const auto& c : centers) xs.push_back(c[0]);
    std::sort(xs.begin(), xs.end());
    long long covered = 0;
    for (long long i = 0; i < counts[0]; ++i) {
      double g = B.lo[0] + B.side(0) * (i + 0.5) / counts[0];
      auto it = std::lower_bound(xs.begin(), xs.end(), g);
      bool hit = (it != xs.end() && *it - g <= rho) ||
                 (it != xs.begin() && g - *std::prev(it) <= rho);
      covered += hit;
    }
    return double(covered) / double(total);
  }

  std::vector<long long> idx(d, 0), zero(d, 0), top(d);
  for (int i = 0; i < d; ++i) top[i] = counts[i] - 1;
  std::vector<double> g(d);
  long long covered = 0;
  for (long long cell = 0; cell < total; ++cell) {
    for (int i = 0; i < d; ++i)
      g[i] = B.lo[i] + B.side(i) * (idx[i] + 0.5) / counts[i];
    for (const auto& c : centers) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += (g[i] - c[i]) * (g[i] - c[i]);
      if (s <= rho * rho) {
        ++covered;
        break;
      }
    }
    advance(idx, zero, top);
  }
  return double(covered) / double(total);
}

}  // namespace

ResonantSystem::ResonantSystem(const Manifold& mf, Box base,
                               std::function<double(double)> psi, double rho0)
    : mf_(&mf), base_(std::move(base)), psi_(std::move(psi)), rho0_(rho0) {
  if (base_.dim() != mf.domain_dim())
    throw std::invalid_argument("base box dimension != model parameter dimension");
  for (int i = 0; i < base_.dim(); ++i)
    if (base_.lo[i] < mf.domain().lo[i] - 1e-12 || base_.hi[i] > mf.domain().hi[i] + 1e-12)
      throw std::invalid_argument("base box must sit inside the model domain");
  if (!psi_) throw std::invalid_argument("threshold function is empty");
  if (!(psi_(1.0) > 0)) throw std::invalid_argument("threshold must be positive at q = 1");
  if (!(rho0_ > 0)) throw std::invalid_argument("need rho0 > 0");
}

std::vector<RationalPoint> ResonantSystem::members(int t, int threads) const {
  if (t < 1 || t > 20)
    throw std::invalid_argument("level must lie in [1, 20]");
  const long long qmax = 1LL << t;
  return near_pairs(*mf_, base_, qmax,
                    [this](long long q) { return 0.5 * psi_(double(q)); }, threads);
}

double ResonantSystem::rho(double q) const {
  const int d = mf_->domain_dim(), m = mf_->codomain_dim();
  const double v = std::pow(psi_(q), m) * std::pow(q, d + 1);
  if (!(v > 0)) throw std::domain_error("ball radius needs psi(q) > 0");
  return rho0_ * std::pow(v, -1.0 / d);
}

double ubiquity_fraction(const ResonantSystem& rs, int t, const Box& B, double qmin,
                         double grid_h, int threads) {
  if (t < 1) throw std::invalid_argument("level must be at least 1");
  if (B.dim() != rs.base().dim()) throw std::invalid_argument("box dimension mismatch");
  const double rho = rs.rho(std::pow(2.0, t));
  if (grid_h > rho / 10)
    throw std::invalid_argument("coverage grid coarser than a tenth of the ball radius");
  const double h = grid_h > 0 ? grid_h : rho / 10;

  std::vector<std::vector<double>> centers;
  for (const auto& p : rs.members(t, threads)) {
    if (double(p.q) <= qmin) continue;
    std::vector<double> c(p.a.size());
    for (size_t i = 0; i < p.a.size(); ++i) c[i] = double(p.a[i]) / double(p.q);
    centers.push_back(std::move(c));
  }
  return covered_fraction(centers, rho, B, h);
}

double coverage_floor(int d) {
  if (d < 1) throw std::invalid_argument("need d >= 1");
  return std::ldexp(1.0, -d - 1);
}

double detection_rho0(double c0, double kappa, int n, int d) {
  if (!(c0 >= 1) || !(kappa > 0) || d < 1 || n <= d)
    throw std::invalid_argument("bad detection constants");
  return std::pow(std::pow(c0, n + d + 1) * std::pow(kappa, -2.0 * n), 1.0 / d);
}

TransferReport transfer_check(const ResonantSystem& rs, int t, int per_member,
                              unsigned long long seed) {
  if (per_member < 1) throw std::invalid_argument("need at least one sample per member");
  const Manifold& mf = rs.model();
  const int d = mf.domain_dim(), m = mf.codomain_dim();
  // Any Lipschitz upper bound works; keeping it at least 1 also confines the
  // parameter coordinates, whose defect is q |x - a/q| <= psi / (2 c1).
  const double c1 = std::max(1.0, mf.lipschitz());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  TransferReport rep;
  std::vector<double> x(d);
  for (const auto& p : rs.members(t)) {
    const double q = double(p.q);
    const double psi = rs.psi(q);
    const double w = psi / (2 * c1 * q);
    for (int s = 0; s < per_member; ++s) {
      for (int i = 0; i < d; ++i) {
        double xi = double(p.a[i]) / q + w * uni(rng);
        x[i] = std::clamp(xi, mf.domain().lo[i], mf.domain().hi[i]);
      }
      std::vector<double> f = mf.eval(x);
      double worst = 0;
      for (int i = 0; i < d; ++i)
        worst = std::max(worst, std::fabs(q * x[i] - double(p.a[i])));
      for (int l = 0; l < m; ++l)
        worst = std::max(worst, std::fabs(q * f[l] - double(p.b[l])));
      const double margin = worst / psi;
      rep.samples += 1;
      rep.worst_margin = std::max(rep.worst_margin, margin);
      if (margin >= 1.0) rep.violations += 1;
    }
  }
  return rep;
}

namespace {

struct HitCenter {
  long long q;
  double x;
};

// Rational points of the unit circle with positive height: (0, 1) and the
// coprime legs (u^2 - v^2, 2uv) over the hypotenuse u^2 + v^2, both signs.
std::vector<HitCenter> unit_circle_centers(const Box& B, long long qmax) {
  std::vector<HitCenter> cs;
  if (B.lo[0] <= 0 && 0 <= B.hi[0]) cs.push_back({1, 0.0});
  for (long long u = 2; u * u + 1 <= qmax; ++u) {
    for (long long v = 1; v < u; ++v) {
      const long long c = u * u + v * v;
      if (c > qmax) break;
      if ((u - v) % 2 == 0 || std::gcd(u, v) != 1) continue;
      for (long long leg : {u * u - v * v, 2 * u * v}) {
        for (int sgn : {-1, 1}) {
          const double x = double(sgn * leg) / double(c);
          if (x >= B.lo[0] && x <= B.hi[0]) cs.push_back({c, x});
        }
      }
    }
  }
  return cs;
}

}  // namespace

DimEstimate dim_estimate(const Manifold& mf, double tau, const std::vector<double>& Qseq,
                         Box B, int threads) {
  if (!(tau > 0)) throw std::invalid_argument("need tau > 0");
  if (Qseq.size() < 4) throw std::invalid_argument("need at least four scales");
  if (!(Qseq.front() >= 1)) throw std::invalid_argument("scales start at Q >= 1");
  for (size_t i = 0; i + 1 < Qseq.size(); ++i)
    if (!(Qseq[i] < Qseq[i + 1])) throw std::invalid_argument("scales must increase");
  if (mf.domain_dim() != 1)
    throw std::invalid_argument("dimension estimates cover curves only");
  if (B.dim() == 0)
    B = mf.domain();
  else if (B.dim() != 1)
    throw std::invalid_argument("box dimension mismatch");
  else
    B = B.intersect(mf.domain());

  const long long qmax = static_cast<long long>(std::floor(Qseq.back()));
  std::vector<HitCenter> centers;
  if (!mf.polynomial() && mf.sphere_level() == 1.0) {
    centers = unit_circle_centers(B, qmax);
  } else {
    auto pairs = near_pairs(mf, B, qmax,
                            [tau](long long q) { return 0.5 * std::pow(double(q), -tau); },
                            threads);
    centers.reserve(pairs.size());
    for (const auto& p : pairs)
      centers.push_back({p.q, double(p.a[0]) / double(p.q)});
  }
  std::sort(centers.begin(), centers.end(), [](const HitCenter& l, const HitCenter& r) {
    return l.q != r.q ? l.q < r.q : l.x < r.x;
  });

  DimEstimate est;
  est.tau = tau;
  for (double Q : Qseq) {
    const double s = std::pow(Q, -(1.0 + tau));
    est.scales.push_back(s);
    std::vector<long long> idx;
    for (const auto& c : centers) {
      if (double(c.q) > Q) break;
      idx.push_back(static_cast<long long>(std::floor((c.x - B.lo[0]) / s)));
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    est.counts.push_back(static_cast<long long>(idx.size()));
  }

  std::vector<double> fx, fy;
  for (size_t i = 0; i < est.scales.size(); ++i) {
    if (est.counts[i] > 0) {
      fx.push_back(1.0 / est.scales[i]);
      fy.push_back(double(est.counts[i]));
    }
  }
  if (fy.empty()) throw std::runtime_error("no rational pairs land in the box at any scale");
  if (fx.size() < 3) return est;  // slope 0, marked unreliable

  const ExponentFit fit = exponent_fit(fx, fy);
  est.slope = fit.slope;
  est.dimension = std::clamp(fit.slope, 0.0, double(mf.domain_dim()));
  est.confidence = 1.96 * fit.slope_stderr;
  est.r2 = fit.r2;

  double lo = fit.slope, hi = fit.slope;
  for (size_t k = fx.size() - 2; k < fx.size(); ++k) {
    if (k < 2) continue;
    const ExponentFit pf = exponent_fit(std::vector<double>(fx.begin(), fx.begin() + k),
                                        std::vector<double>(fy.begin(), fy.begin() + k));
    lo = std::min(lo, pf.slope);
    hi = std::max(hi, pf.slope);
  }
  est.reliable = est.r2 >= 0.95 && hi - lo <= 0.05;
  return est;
}

}  // namespace ratnear
