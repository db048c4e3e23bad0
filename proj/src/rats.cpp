#include "ratnear/rats.hpp"

#include "ratnear/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
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

long long triple_gcd(const RationalPoint& p) {
  long long g = p.q;
  for (long long v : p.a) g = std::gcd(g, std::llabs(v));
  for (long long v : p.b) g = std::gcd(g, std::llabs(v));
  return g;
}

HiFloat hi_from_rat(const Rat& x) {
  return boost::multiprecision::numerator(x).convert_to<HiFloat>() /
         boost::multiprecision::denominator(x).convert_to<HiFloat>();
}

// Steps a multi-index through [lo_i, hi_i]; returns false when exhausted.
bool advance(std::vector<long long>& v, const std::vector<long long>& lo,
             const std::vector<long long>& hi) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (++v[i] <= hi[i]) return true;
    v[i] = lo[i];
  }
  return false;
}

}  // namespace

bool operator==(const RationalPoint& l, const RationalPoint& r) {
  return l.q == r.q && l.a == r.a && l.b == r.b;
}

bool operator<(const RationalPoint& l, const RationalPoint& r) {
  if (l.q != r.q) return l.q < r.q;
  if (l.a != r.a) return l.a < r.a;
  return l.b < r.b;
}

Rat residual_exact(const Manifold& mf, const RationalPoint& p) {
  std::vector<Rat> x(mf.domain_dim());
  for (int i = 0; i < mf.domain_dim(); ++i) x[i] = Rat(p.a[i], p.q);
  std::vector<Rat> f = mf.eval_exact(x);
  Rat worst(0);
  for (int l = 0; l < mf.codomain_dim(); ++l) {
    Rat r = Rat(p.q) * f[l] - Rat(p.b[l]);
    if (r < 0) r = -r;
    if (r > worst) worst = r;
  }
  return worst;
}

double residual(const Manifold& mf, const RationalPoint& p) {
  std::vector<double> x(mf.domain_dim());
  for (int i = 0; i < mf.domain_dim(); ++i) x[i] = double(p.a[i]) / double(p.q);
  std::vector<double> f = mf.eval(x);
  double worst = 0;
  for (int l = 0; l < mf.codomain_dim(); ++l)
    worst = std::max(worst, std::fabs(p.q * f[l] - double(p.b[l])));
  return worst;
}

std::vector<RationalPoint> enumerate_R(const Manifold& mf, const Box& B, double Q,
                                       double delta, double psi, int threads) {
  if (B.dim() != mf.domain_dim()) throw std::invalid_argument("box dimension != d");
  if (!(Q >= 1) || psi < 0) throw std::invalid_argument("need Q >= 1 and psi >= 0");
  const int d = mf.domain_dim(), m = mf.codomain_dim();
  const long long qlo = static_cast<long long>(std::floor(delta * Q)) + 1;
  const long long qhi = static_cast<long long>(std::floor(Q));
  if (qlo > qhi) return {};

  const Rat psi_r = scalar_traits<Rat>::from_double(psi);
  std::vector<Rat> box_lo(d), box_hi(d);
  for (int i = 0; i < d; ++i) {
    box_lo[i] = scalar_traits<Rat>::from_double(B.lo[i]);
    box_hi[i] = scalar_traits<Rat>::from_double(B.hi[i]);
  }

  const int chunks = std::max(1, threads);
  std::vector<std::vector<RationalPoint>> partial(chunks);
  run_chunked(qlo, qhi + 1, threads, [&](int chunk, long long a0, long long a1) {
    auto& out = partial[chunk];
    std::vector<long long> alo(d), ahi(d), a(d);
    std::vector<long long> blo(m), bhi(m), b(m);
    std::vector<Rat> x(d);
    for (long long q = a0; q < a1; ++q) {
      bool empty = false;
      for (int i = 0; i < d; ++i) {
        alo[i] = ceil_rat(Rat(q) * box_lo[i]);
        ahi[i] = floor_rat(Rat(q) * box_hi[i]);
        if (alo[i] > ahi[i]) empty = true;
      }
      if (empty) continue;
      a = alo;
      do {
        for (int i = 0; i < d; ++i) x[i] = Rat(a[i], q);
        bool some = true;
        if (mf.polynomial()) {
          std::vector<Rat> f = mf.eval_exact(x);
          for (int l = 0; l < m; ++l) {
            Rat center = Rat(q) * f[l];
            blo[l] = ceil_rat(center - psi_r);
            bhi[l] = floor_rat(center + psi_r);
            if (blo[l] > bhi[l]) some = false;
          }
        } else {
          std::vector<double> xd(d);
          for (int i = 0; i < d; ++i) xd[i] = scalar_traits<Rat>::to_double(x[i]);
          std::vector<double> f = mf.eval(xd);
          for (int l = 0; l < m; ++l) {
            blo[l] = static_cast<long long>(std::ceil(q * f[l] - psi));
            bhi[l] = static_cast<long long>(std::floor(q * f[l] + psi));
            if (blo[l] > bhi[l]) some = false;
          }
        }
        if (!some) continue;
        b = blo;
        do {
          RationalPoint p{q, a, b};
          if (triple_gcd(p) == 1) out.push_back(std::move(p));
        } while (advance(b, blo, bhi));
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

namespace {

// ---- exact circle counting ----------------------------------------------

NearCount count_circle(const Manifold& mf, const Box& B, double Q, double eps,
                       int threads) {
  const double r = mf.sphere_level();
  if (!(eps * eps < r))
    throw std::invalid_argument("circle counting needs eps < sqrt(r)");
  const Rat r_r = scalar_traits<Rat>::from_double(r);
  const Rat eps_r = scalar_traits<Rat>::from_double(eps);
  const Rat band = 4 * r_r * eps_r * eps_r;
  const double lo = B.lo[0], hi = B.hi[0];
  const HiFloat lo_h = hi_from_rat(scalar_traits<Rat>::from_double(lo));
  const HiFloat hi_h = hi_from_rat(scalar_traits<Rat>::from_double(hi));
  const HiFloat r_h = hi_from_rat(r_r);
  const HiFloat sqrt_r = sqrt(r_h);
  const HiFloat eps_h = hi_from_rat(eps_r);
  const double D = eps * (1 + 2e-6);
  const long long qmax = static_cast<long long>(std::floor(Q));

  auto f_of = [&](HiFloat x) { return sqrt(r_h - x * x); };
  const HiFloat f_lo = f_of(lo_h), f_hi = f_of(hi_h);

  std::vector<NearCount> partial(std::max(1, threads));
  run_chunked(1, qmax + 1, threads, [&](int chunk, long long q0, long long q1) {
    NearCount& local = partial[chunk];
    for (long long q = q0; q < q1; ++q) {
      long long amin = static_cast<long long>(std::ceil(q * (lo - D)));
      long long amax = static_cast<long long>(std::floor(q * (hi + D)));
      for (long long a = amin; a <= amax; ++a) {
        double pa = double(a) / double(q);
        double wlo = std::max(lo, pa - D), whi = std::min(hi, pa + D);
        if (wlo > whi) continue;
        // f is even and decreasing in |x|; range over the window from the
        // endpoints, plus the apex when the window crosses 0.
        double fl0 = std::sqrt(std::max(0.0, r - wlo * wlo));
        double fl1 = std::sqrt(std::max(0.0, r - whi * whi));
        double fmin = std::min(fl0, fl1) - 1e-12;
        double fmax = std::max(fl0, fl1) + 1e-12;
        if (wlo <= 0 && 0 <= whi) fmax = std::sqrt(r) + 1e-12;
        long long bmin = static_cast<long long>(std::ceil(q * (fmin - D)));
        long long bmax = static_cast<long long>(std::floor(q * (fmax + D)));
        for (long long b = bmin; b <= bmax; ++b) {
          if (std::gcd(std::gcd(q, std::llabs(a)), std::llabs(b)) != 1) continue;
          // Exact band test: | |p| - sqrt(r) | <= eps iff
          // (t - r - eps^2)^2 <= 4 r eps^2 with t = |p|^2.
          Rat t(BigInt(a) * a + BigInt(b) * b, BigInt(q) * q);
          Rat side = t - r_r - eps_r * eps_r;
          if (side * side > band) continue;
          // Arc check: the nearest circle point must project into B,
          // otherwise measure against the arc endpoints.
          HiFloat t_h = hi_from_rat(t);
          HiFloat xs = sqrt_r * (HiFloat(a) / HiFloat(q)) / sqrt(t_h);
          if (xs >= lo_h && xs <= hi_h) {
            ++local.accepted;
            continue;
          }
          HiFloat pah = HiFloat(a) / HiFloat(q), pbh = HiFloat(b) / HiFloat(q);
          HiFloat d0 = sqrt((pah - lo_h) * (pah - lo_h) + (pbh - f_lo) * (pbh - f_lo));
          HiFloat d1 = sqrt((pah - hi_h) * (pah - hi_h) + (pbh - f_hi) * (pbh - f_hi));
          HiFloat margin = (d0 < d1 ? d0 : d1) / eps_h - 1;
          if (margin <= -1e-30)
            ++local.accepted;
          else if (margin < 1e-30)
            ++local.ambiguous;
        }
      }
    }
  });

  NearCount total;
  for (const auto& p : partial) {
    total.accepted += p.accepted;
    total.ambiguous += p.ambiguous;
  }
  return total;
}

// ---- curve counting via window minimization ------------------------------

struct CurveEval {
  const Manifold* mf = nullptr;
  std::vector<std::vector<double>> f, df;  // Horner rows when polynomial

  explicit CurveEval(const Manifold& model) : mf(&model) {
    f = model.curve_coefficients();
    for (const auto& row : f) {
      std::vector<double> drow;
      for (size_t i = 1; i < row.size(); ++i) drow.push_back(row[i] * double(i));
      df.push_back(std::move(drow));
    }
  }

  static double horner(const std::vector<double>& c, double x) {
    double acc = 0;
    for (size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
  }

  double value(int l, double x) const {
    return f.empty() ? mf->curve_derivative(l, 0, x) : horner(f[l], x);
  }
  double slope(int l, double x) const {
    return f.empty() ? mf->curve_derivative(l, 1, x) : horner(df[l], x);
  }
};

// Golden-section minimum of F over [a, b].
template <class F>
double golden_min(F&& fn, double a, double b) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < 48; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = fn(x2);
    }
  }
  return std::min(f1, f2);
}

// Smallest squared distance from (pa, pb) to the graph over [wlo, whi].
double min_dist_sq_curve(const CurveEval& ev, int m, double pa,
                         const std::vector<double>& pb, double wlo, double whi) {
  auto F = [&](double x) {
    double s = (x - pa) * (x - pa);
    for (int l = 0; l < m; ++l) {
      double t = ev.value(l, x) - pb[l];
      s += t * t;
    }
    return s;
  };
  if (whi <= wlo) return F(wlo);
  constexpr int G = 16;
  double vals[G + 1], best = HUGE_VAL;
  for (int i = 0; i <= G; ++i) vals[i] = F(wlo + (whi - wlo) * i / G);
  for (int i = 0; i <= G; ++i) {
    bool is_min = (i == 0 || vals[i] <= vals[i - 1]) &&
                  (i == G || vals[i] <= vals[i + 1]);
    if (!is_min) continue;
    double a = wlo + (whi - wlo) * std::max(0, i - 1) / G;
    double b = wlo + (whi - wlo) * std::min(G, i + 1) / G;
    best = std::min(best, golden_min(F, a, b));
  }
  return best;
}

NearCount count_curve(const Manifold& mf, const Box& B, double Q, double eps,
                      int threads) {
  const int m = mf.codomain_dim();
  const double lo = B.lo[0], hi = B.hi[0];
  const double D = eps * (1 + 2e-6);
  const double acc_thresh = eps * (1 - 1e-6), rej_thresh = eps * (1 + 1e-6);
  const double L = mf.lipschitz();
  const long long qmax = static_cast<long long>(std::floor(Q));
  const CurveEval ev(mf);

  std::vector<NearCount> partial(std::max(1, threads));
  run_chunked(1, qmax + 1, threads, [&](int chunk, long long q0, long long q1) {
    NearCount& local = partial[chunk];
    std::vector<double> fmin(m), fmax(m), pb(m);
    std::vector<long long> blo(m), bhi(m), b(m);
    for (long long q = q0; q < q1; ++q) {
      long long amin = static_cast<long long>(std::ceil(q * (lo - D)));
      long long amax = static_cast<long long>(std::floor(q * (hi + D)));
      for (long long a = amin; a <= amax; ++a) {
        double pa = double(a) / double(q);
        double wlo = std::max(lo, pa - D), whi = std::min(hi, pa + D);
        if (wlo > whi) continue;
        // Component ranges over the window: sampled, padded by the secant
        // error bound L * gap / 2 so the true range is always contained.
        constexpr int S = 8;
        double gap = (whi - wlo) / S;
        for (int l = 0; l < m; ++l) {
          fmin[l] = HUGE_VAL;
          fmax[l] = -HUGE_VAL;
        }
        for (int i = 0; i <= S; ++i) {
          double x = wlo + gap * i;
          for (int l = 0; l < m; ++l) {
            double v = ev.value(l, x);
            fmin[l] = std::min(fmin[l], v);
            fmax[l] = std::max(fmax[l], v);
          }
        }
        double pad = 0.5 * L * gap + 1e-12;
        for (int l = 0; l < m; ++l) {
          blo[l] = static_cast<long long>(std::ceil(q * (fmin[l] - pad - D)));
          bhi[l] = static_cast<long long>(std::floor(q * (fmax[l] + pad + D)));
        }
        bool some = true;
        for (int l = 0; l < m; ++l)
          if (blo[l] > bhi[l]) some = false;
        if (!some) continue;
        b = blo;
        do {
          long long g = std::gcd(q, std::llabs(a));
          for (int l = 0; l < m && g != 1; ++l) g = std::gcd(g, std::llabs(b[l]));
          if (g != 1) continue;
          for (int l = 0; l < m; ++l) pb[l] = double(b[l]) / double(q);

          // Cheap two-sided screen before running the minimizer.
          double lower = 0;
          double ca = pa < wlo ? wlo - pa : (pa > whi ? pa - whi : 0);
          lower += ca * ca;
          for (int l = 0; l < m; ++l) {
            double gdist = pb[l] < fmin[l] - pad ? fmin[l] - pad - pb[l]
                           : pb[l] > fmax[l] + pad ? pb[l] - fmax[l] - pad
                                                   : 0;
            lower += gdist * gdist;
          }
          if (lower > rej_thresh * rej_thresh) continue;
          double xc = std::clamp(pa, wlo, whi);
          double upper = (pa - xc) * (pa - xc);
          for (int l = 0; l < m; ++l) {
            double t = ev.value(l, xc) - pb[l];
            upper += t * t;
          }
          if (upper <= acc_thresh * acc_thresh) {
            ++local.accepted;
            continue;
          }

          double dist = std::sqrt(min_dist_sq_curve(ev, m, pa, pb, wlo, whi));
          if (dist <= acc_thresh)
            ++local.accepted;
          else if (dist < rej_thresh)
            ++local.ambiguous;
        } while (advance(b, blo, bhi));
      }
    }
  });

  NearCount total;
  for (const auto& p : partial) {
    total.accepted += p.accepted;
    total.ambiguous += p.ambiguous;
  }
  return total;
}

// ---- generic fallback: projected gradient over the window box ------------

NearCount count_generic(const Manifold& mf, const Box& B, double Q, double eps,
                        int threads) {
  const int d = mf.domain_dim(), m = mf.codomain_dim();
  const double D = eps * (1 + 2e-6);
  const double acc_thresh = eps * (1 - 1e-6), rej_thresh = eps * (1 + 1e-6);
  const long long qmax = static_cast<long long>(std::floor(Q));
  const double L = mf.lipschitz();

  auto dist_sq = [&](const std::vector<double>& x, const std::vector<double>& pa,
                     const std::vector<double>& pb) {
    double s = 0;
    for (int i = 0; i < d; ++i) s += (x[i] - pa[i]) * (x[i] - pa[i]);
    auto f = mf.eval(x);
    for (int l = 0; l < m; ++l) s += (f[l] - pb[l]) * (f[l] - pb[l]);
    return s;
  };

  std::vector<NearCount> partial(std::max(1, threads));
  run_chunked(1, qmax + 1, threads, [&](int chunk, long long q0, long long q1) {
    NearCount& local = partial[chunk];
    std::vector<long long> alo(d), ahi(d), av(d), blo(m), bhi(m), bv(m);
    for (long long q = q0; q < q1; ++q) {
      for (int i = 0; i < d; ++i) {
        alo[i] = static_cast<long long>(std::ceil(q * (B.lo[i] - D)));
        ahi[i] = static_cast<long long>(std::floor(q * (B.hi[i] + D)));
      }
      av = alo;
      do {
        std::vector<double> pa(d), seed(d);
        for (int i = 0; i < d; ++i) {
          pa[i] = double(av[i]) / double(q);
          seed[i] = std::clamp(pa[i], B.lo[i], B.hi[i]);
        }
        auto fseed = mf.eval(seed);
        double drift = 0;
        for (int i = 0; i < d; ++i) drift += (pa[i] - seed[i]) * (pa[i] - seed[i]);
        drift = std::sqrt(drift);
        for (int l = 0; l < m; ++l) {
          blo[l] = static_cast<long long>(std::ceil(q * (fseed[l] - L * D - drift * L - D)));
          bhi[l] = static_cast<long long>(std::floor(q * (fseed[l] + L * D + drift * L + D)));
        }
        bool some = true;
        for (int l = 0; l < m; ++l)
          if (blo[l] > bhi[l]) some = false;
        if (!some) continue;
        bv = blo;
        do {
          long long g = q;
          for (long long v : av) g = std::gcd(g, std::llabs(v));
          for (long long v : bv) g = std::gcd(g, std::llabs(v));
          if (g != 1) continue;
          std::vector<double> pb(m);
          for (int l = 0; l < m; ++l) pb[l] = double(bv[l]) / double(q);

          // Projected gradient descent from the clamped seed.
          std::vector<double> x = seed;
          double best = dist_sq(x, pa, pb);
          double step = 0.25 * D + 1e-12;
          for (int it = 0; it < 120; ++it) {
            Jet jet = mf.jet(x);
            std::vector<double> grad(d);
            for (int i = 0; i < d; ++i) {
              grad[i] = 2 * (x[i] - pa[i]);
              for (int l = 0; l < m; ++l)
                grad[i] += 2 * (jet.f[l] - pb[l]) * jet.df[l][i];
            }
            std::vector<double> trial(d);
            for (int i = 0; i < d; ++i)
              trial[i] = std::clamp(x[i] - step * grad[i], B.lo[i], B.hi[i]);
            double v = dist_sq(trial, pa, pb);
            if (v < best) {
              best = v;
              x = trial;
              step *= 1.3;
            } else {
              step *= 0.5;
              if (step < 1e-14) break;
            }
          }
          double dist = std::sqrt(best);
          if (dist <= acc_thresh)
            ++local.accepted;
          else if (dist < rej_thresh)
            ++local.ambiguous;
        } while (advance(bv, blo, bhi));
      } while (advance(av, alo, ahi));
    }
  });

  NearCount total;
  for (const auto& p : partial) {
    total.accepted += p.accepted;
    total.ambiguous += p.ambiguous;
  }
  return total;
}

}  // namespace

NearCount count_N(const Manifold& mf, const Box& B, double Q, double eps,
                  int threads) {
  if (B.dim() != mf.domain_dim()) throw std::invalid_argument("box dimension != d");
  if (!(Q >= 1) || !(eps > 0)) throw std::invalid_argument("need Q >= 1 and eps > 0");
  if (mf.domain_dim() == 1 && mf.sphere_level() > 0)
    return count_circle(mf, B, Q, eps, threads);
  if (mf.domain_dim() == 1) return count_curve(mf, B, Q, eps, threads);
  return count_generic(mf, B, Q, eps, threads);
}

double coverage_measure(const std::vector<std::vector<double>>& centers, double rho,
                        const Box& B) {
  if (!(rho > 0)) throw std::invalid_argument("need rho > 0");
  const int d = B.dim();
  std::vector<long long> counts(d);
  long long total = 1;
  for (int i = 0; i < d; ++i) {
    counts[i] = std::max<long long>(1, static_cast<long long>(std::ceil(B.side(i) / (rho / 10))));
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

  std::vector<long long> idx(d, 0);
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
    int axis = 0;
    while (axis < d && ++idx[axis] == counts[axis]) idx[axis++] = 0;
  }
  return double(covered) / double(total);
}

ExponentFit exponent_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit needs at least two matched samples");
  const int n = static_cast<int>(xs.size());
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    if (!(xs[i] > 0) || !(ys[i] > 0))
      throw std::invalid_argument("log fit needs positive samples");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit needs distinct x samples");
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  if (n > 2) {
    double resid = std::max(0.0, syy - fit.slope * sxy);
    fit.slope_stderr = std::sqrt(resid / ((n - 2) * sxx));
  }
  return fit;
}

}  // namespace ratnear
