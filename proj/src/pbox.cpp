#include "ratnear/pbox.hpp"

#include "ratnear/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ratnear {

namespace {

using Mat = std::vector<std::vector<double>>;

double det_gauss(Mat a) {
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

// Inverse by Gauss-Jordan; returns false when a pivot degenerates.
bool invert(Mat a, Mat& out) {
  const int n = static_cast<int>(a.size());
  double scale = 0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::fabs(v));
  if (scale == 0) return false;
  out.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) out[i][i] = 1;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (std::fabs(a[piv][c]) < 1e-13 * scale) return false;
    std::swap(a[piv], a[c]);
    std::swap(out[piv], out[c]);
    double d = a[c][c];
    for (int j = 0; j < n; ++j) {
      a[c][j] /= d;
      out[c][j] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      double f = a[r][c];
      if (f == 0) continue;
      for (int j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        out[r][j] -= f * out[c][j];
      }
    }
  }
  return true;
}

double sup_norm_rows(const Mat& m) {
  double best = 0;
  for (const auto& row : m) {
    double s = 0;
    for (double v : row) s += std::fabs(v);
    best = std::max(best, s);
  }
  return best;
}

bool inside_original(const Mat& G, const std::vector<double>& theta,
                     const std::vector<long long>& a) {
  for (size_t i = 0; i < G.size(); ++i) {
    double s = 0;
    for (size_t j = 0; j < G[i].size(); ++j)
      s += G[i][j] * static_cast<double>(a[j]);
    if (std::fabs(s) > theta[i]) return false;
  }
  return true;
}

MultiVector<double> row_mv(const std::vector<double>& row) {
  return MultiVector<double>::vector(static_cast<int>(row.size()), row);
}

}  // namespace

double family_determinant(const ParallelepipedFamily& fam,
                          const std::vector<double>& x) {
  return det_gauss(fam.rows(x));
}

WeightProfile make_weight_profile(std::vector<double> theta) {
  const int k = static_cast<int>(theta.size());
  if (k < 2) throw std::invalid_argument("weight profile needs at least two entries");
  double logprod = 0;
  for (double t : theta) {
    if (!(t > 0)) throw std::invalid_argument("thresholds must be positive");
    logprod += std::log(t);
  }
  WeightProfile wp;
  wp.scalar = std::exp(logprod / k);
  double lead = 0;
  wp.tilde = 0;
  for (int r = 1; r < k; ++r) {
    lead += std::log(theta[r - 1]);
    wp.tilde = std::max(wp.tilde, std::exp(lead - r * logprod / k));
  }
  wp.theta = std::move(theta);
  return wp;
}

Rat weight_product(const std::vector<Rat>& theta) {
  Rat prod(1);
  for (const Rat& t : theta) {
    if (!(t > 0)) throw std::invalid_argument("thresholds must be positive");
    prod *= t;
  }
  return prod;
}

Rat weight_tilde_pow_k(const std::vector<Rat>& theta) {
  const int k = static_cast<int>(theta.size());
  if (k < 2) throw std::invalid_argument("weight profile needs at least two entries");
  const Rat prod = weight_product(theta);
  Rat best(0), lead(1), powk(1);
  for (int r = 1; r < k; ++r) {
    lead *= theta[r - 1];
    // (theta_1..theta_r / scalar^r)^k = lead^k / prod^r.
    Rat lk(1);
    for (int i = 0; i < k; ++i) lk *= lead;
    powk *= prod;
    Rat val = lk / powk;
    if (val > best) best = val;
  }
  return best;
}

bool membership_A(const ParallelepipedFamily& fam, const std::vector<double>& theta,
                  const std::vector<double>& x) {
  const int k = fam.k;
  if (static_cast<int>(theta.size()) != k)
    throw std::invalid_argument("threshold count != family dimension");
  Mat G = fam.rows(x);
  Mat Ginv;
  if (!invert(G, Ginv))
    throw std::runtime_error("singular family matrix at the sample");
  double tmax = 0;
  for (double t : theta) {
    if (!(t > 0)) throw std::invalid_argument("thresholds must be positive");
    tmax = std::max(tmax, t);
  }
  const double master = sup_norm_rows(Ginv) * tmax;

  // Diagonalize with accumulated slack: row operations keep every solution
  // inside the relaxed system, so the per-coordinate windows are complete.
  Mat w = G;
  double scale = 0;
  for (const auto& row : G)
    for (double v : row) scale = std::max(scale, std::fabs(v));
  std::vector<double> slack = theta;
  std::vector<int> pivot(k, -1);
  std::vector<bool> used(k, false);
  for (int c = 0; c < k; ++c) {
    int best = -1;
    for (int r = 0; r < k; ++r)
      if (!used[r] && (best < 0 || std::fabs(w[r][c]) > std::fabs(w[best][c])))
        best = r;
    if (std::fabs(w[best][c]) < 1e-13 * scale)
      throw std::runtime_error("singular family matrix at the sample");
    used[best] = true;
    pivot[c] = best;
    for (int r = 0; r < k; ++r) {
      if (r == best || w[r][c] == 0) continue;
      double f = w[r][c] / w[best][c];
      for (int j = 0; j < k; ++j) w[r][j] -= f * w[best][j];
      w[r][c] = 0;
      slack[r] += std::fabs(f) * slack[best];
    }
  }
  std::vector<long long> bound(k);
  double count = 1;
  for (int c = 0; c < k; ++c) {
    double b = std::min(master * (1 + 1e-9),
                        slack[pivot[c]] / std::fabs(w[pivot[c]][c]) + 1e-9);
    bound[c] = static_cast<long long>(std::floor(b + 1e-9));
    count *= 2 * static_cast<double>(bound[c]) + 1;
  }
  if (count > 5e7)
    throw std::runtime_error("membership enumeration window too large");

  std::vector<long long> a(k);
  for (int c = 0; c < k; ++c) a[c] = -bound[c];
  while (true) {
    bool nonzero = false;
    for (int c = 0; c < k && !nonzero; ++c) nonzero = a[c] != 0;
    if (nonzero && inside_original(G, theta, a)) return true;
    int c = 0;
    for (; c < k; ++c) {
      if (a[c] < bound[c]) {
        ++a[c];
        break;
      }
      a[c] = -bound[c];
    }
    if (c == k) break;
  }
  return false;
}

double measure_A(const ParallelepipedFamily& fam, const std::vector<double>& theta,
                 const Box& B, double grid_h, int threads) {
  const int d = B.dim();
  double tmin = *std::min_element(theta.begin(), theta.end());
  double rown = 0;
  // Row norms sampled at the center and corners of B.
  std::vector<std::vector<double>> samples{B.center()};
  for (int mask = 0; mask < (1 << d); ++mask) {
    std::vector<double> corner(d);
    for (int i = 0; i < d; ++i) corner[i] = (mask >> i & 1) ? B.hi[i] : B.lo[i];
    samples.push_back(std::move(corner));
  }
  for (const auto& s : samples)
    for (const auto& row : fam.rows(s)) rown = std::max(rown, norm(row_mv(row)));
  if (grid_h > tmin / (10 * rown))
    throw std::invalid_argument("grid too coarse for the smallest threshold");

  std::vector<long long> steps(d);
  long long total = 1;
  for (int i = 0; i < d; ++i) {
    steps[i] = std::max<long long>(1, static_cast<long long>(std::ceil(B.side(i) / grid_h)));
    total *= steps[i];
  }
  std::atomic<long long> hits{0};
  run_chunked(0, total, threads, [&](int, long long a, long long b) {
    long long mine = 0;
    std::vector<double> x(d);
    for (long long idx = a; idx < b; ++idx) {
      long long t = idx;
      for (int i = 0; i < d; ++i) {
        long long c = t % steps[i];
        t /= steps[i];
        x[i] = B.lo[i] + (c + 0.5) * B.side(i) / steps[i];
      }
      if (membership_A(fam, theta, x)) ++mine;
    }
    hits += mine;
  });
  return static_cast<double>(hits.load()) / static_cast<double>(total);
}

double theta_weight(const ParallelepipedFamily& fam, const WeightProfile& wp,
                    const std::vector<double>& x, const MultiVector<double>& V) {
  const int k = fam.k;
  if (V.dim() != k) throw std::invalid_argument("subspace dimension mismatch");
  if (!V.decomposable()) throw std::invalid_argument("subspace must be decomposable");
  const int r = k - V.grade();
  if (r < 1 || r >= k) throw std::invalid_argument("subspace codimension out of range");
  Mat G = fam.rows(x);
  std::vector<MultiVector<double>> rows;
  rows.reserve(k);
  for (const auto& row : G) rows.push_back(row_mv(row));
  const double nv = norm(V);

  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask : subset_masks(k, r)) {
    MultiVector<double> wv = V;
    double scale = nv;
    double prod = 1;
    for (std::uint32_t m = mask; m; m &= m - 1) {
      int j = __builtin_ctz(m);
      wv = wedge(wv, rows[j]);
      scale *= norm(rows[j]);
      prod *= wp.theta[j];
    }
    if (norm(wv) > 1e-9 * scale)
      best = std::min(best, prod / std::pow(wp.scalar, r));
  }
  if (!std::isfinite(best))
    throw std::runtime_error("no row set complements the subspace");
  return best;
}

ThetaHatEstimate theta_hat(const ParallelepipedFamily& fam, const WeightProfile& wp,
                           const std::vector<double>& x0,
                           const std::vector<double>& radii,
                           int subspace_samples, unsigned long seed) {
  const int k = fam.k;
  const int d = fam.domain.dim();
  for (size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1]))
      throw std::invalid_argument("radii must decrease");
  if (radii.empty()) throw std::invalid_argument("radius trace is empty");

  std::vector<MultiVector<double>> vs;
  for (std::uint32_t mask = 1; mask + 1 < (1u << k); ++mask)
    vs.push_back(MultiVector<double>::basis_blade(k, mask));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1, 1);
  while (static_cast<int>(vs.size()) < static_cast<int>((1u << k) - 2) + subspace_samples) {
    int grade = 1 + static_cast<int>(rng() % (k - 1));
    std::vector<std::vector<double>> vecs(grade, std::vector<double>(k));
    for (auto& v : vecs)
      for (double& c : v) c = uni(rng);
    auto w = from_vectors(k, vecs);
    if (norm(w) > 1e-3) vs.push_back(std::move(w));
  }

  // Per-radius minimum over a punctured grid, then the sup over subspaces.
  ThetaHatEstimate est;
  for (double rad : radii) {
    const int g = 8;
    std::vector<std::vector<double>> pts;
    std::vector<long long> steps(d, 2 * g + 1);
    long long total = 1;
    for (int i = 0; i < d; ++i) total *= steps[i];
    for (long long idx = 0; idx < total; ++idx) {
      long long t = idx;
      std::vector<double> p(d);
      bool origin = true, ok = true;
      for (int i = 0; i < d; ++i) {
        long long c = t % steps[i];
        t /= steps[i];
        p[i] = x0[i] + (static_cast<double>(c) - g) / g * rad;
        origin = origin && c == g;
        ok = ok && p[i] >= fam.domain.lo[i] && p[i] <= fam.domain.hi[i];
      }
      if (!origin && ok) pts.push_back(std::move(p));
    }
    double supv = 0;
    for (const auto& v : vs) {
      double mn = std::numeric_limits<double>::infinity();
      for (const auto& p : pts) mn = std::min(mn, theta_weight(fam, wp, p, v));
      supv = std::max(supv, mn);
    }
    est.trace.push_back(supv);
  }
  est.value = est.trace.back();
  est.stabilized =
      est.trace.size() < 2 ||
      std::fabs(est.trace.back() - est.trace[est.trace.size() - 2]) <=
          0.02 * std::max(est.trace.back(), 1e-12);
  return est;
}

ParallelepipedFamily wronski_family(std::vector<std::function<double(double, int)>> jets,
                                    Box domain) {
  if (domain.dim() != 1)
    throw std::invalid_argument("derivative families live on an interval");
  const int k = static_cast<int>(jets.size());
  if (k < 2) throw std::invalid_argument("need at least two functions");
  ParallelepipedFamily fam;
  fam.k = k;
  fam.domain = domain;
  fam.rows = [jets = std::move(jets), k](const std::vector<double>& x) {
    Mat G(k, std::vector<double>(k));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) G[i][j] = jets[j](x[0], i);
    return G;
  };
  if (std::fabs(family_determinant(fam, fam.domain.center())) < 1e-12)
    throw std::invalid_argument("vanishing determinant at the base point");
  return fam;
}

ParallelepipedFamily wronski_family(const std::vector<Polynomial<double>>& gs,
                                    Box domain) {
  std::vector<std::function<double(double, int)>> jets;
  jets.reserve(gs.size());
  for (const auto& p : gs)
    jets.push_back([p](double x, int order) { return p.derivative(order).eval(x); });
  return wronski_family(std::move(jets), std::move(domain));
}

GoodnessEstimate good_estimate(const std::function<double(const std::vector<double>&)>& f,
                               const Box& B, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("goodness exponent must be positive");
  const int d = B.dim();
  GoodnessEstimate est;
  est.alpha = alpha;

  const int cells = d == 1 ? 4096 : 64;
  const double eps_grid[] = {0.5, 0.25, 0.1, 0.05};
  for (double frac : {1.0, 0.5, 0.25, 0.125}) {
    const double rad = B.inradius() * frac;
    // Center lattice including balls flush against the boundary.
    const int nc = 13;
    std::vector<long long> csteps(d, nc);
    long long ctotal = 1;
    for (int i = 0; i < d; ++i) ctotal *= nc;
    for (long long ci = 0; ci < ctotal; ++ci) {
      long long t = ci;
      Box ball = B;
      bool fits = true;
      for (int i = 0; i < d; ++i) {
        long long c = t % nc;
        t /= nc;
        double clo = B.lo[i] + rad, chi = B.hi[i] - rad;
        if (clo > chi) {
          fits = false;
          break;
        }
        double center = clo + (chi - clo) * static_cast<double>(c) / (nc - 1);
        ball.lo[i] = center - rad;
        ball.hi[i] = center + rad;
      }
      if (!fits) continue;

      long long total = 1;
      for (int i = 0; i < d; ++i) total *= cells;
      std::vector<double> vals(total);
      double sup = 0;
      std::vector<double> x(d);
      for (long long idx = 0; idx < total; ++idx) {
        long long u = idx;
        for (int i = 0; i < d; ++i) {
          long long c = u % cells;
          u /= cells;
          x[i] = ball.lo[i] + (c + 0.5) * ball.side(i) / cells;
        }
        vals[idx] = std::fabs(f(x));
        sup = std::max(sup, vals[idx]);
      }
      if (sup == 0)
        throw std::runtime_error("function vanishes on a sampled ball");
      for (double eps : eps_grid) {
        long long below = 0;
        for (double v : vals)
          if (v < eps * sup) ++below;
        double ratio = static_cast<double>(below) / static_cast<double>(total) /
                       std::pow(eps, alpha);
        if (ratio > est.C) {
          est.C = ratio;
          est.worst_ball = ball;
          est.worst_eps = eps;
        }
      }
    }
  }
  return est;
}

}  // namespace ratnear
