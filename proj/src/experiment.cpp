#include "ratnear/experiment.hpp"

#include "ratnear/cells.hpp"
#include "ratnear/dual.hpp"
#include "ratnear/frames.hpp"
#include "ratnear/manifold.hpp"
#include "ratnear/multivector.hpp"
#include "ratnear/pbox.hpp"
#include "ratnear/rats.hpp"
#include "ratnear/ubiquity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ratnear {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_num(const std::string& text, const std::string& what) {
  const std::string s = trim(text);
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number in " + what + ": '" + s + "'");
  }
}

const std::set<std::string> kKinds{"count",      "coverage",   "cells", "pbox-decay",
                                   "dual-check", "dim",        "ubiquity"};

// Odometer step over {0..top[0]} x {0..top[1]} x ...
void advance_index(std::vector<long long>& idx, const std::vector<long long>& top) {
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < top[i]) {
      ++idx[i];
      return;
    }
    idx[i] = 0;
  }
}

const std::map<std::string, std::set<std::string>> kGridKeys{
    {"count", {"Q", "eps", "B"}},
    {"coverage", {"Q", "psi", "delta", "rho0", "B"}},
    {"cells", {"Qstar", "kappa", "psistar", "c0", "grid", "B"}},
    {"pbox-decay", {"theta", "scales", "grid_h"}},
    {"dual-check", {"grid"}},
    {"dim", {"tau", "Q", "B"}},
    {"ubiquity", {"t", "psi", "rho0", "qmin_factor", "B"}},
};

}  // namespace

double PowerRule::operator()(double q) const { return coeff * std::pow(q, exponent); }

PowerRule PowerRule::parse(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw std::invalid_argument("empty threshold rule");
  const size_t caret = s.find('^');
  if (caret == std::string::npos) return {parse_num(s, "rule"), 0.0};
  const size_t star = s.find('*');
  PowerRule r;
  size_t var = 0;
  if (star != std::string::npos && star < caret) {
    r.coeff = parse_num(s.substr(0, star), "rule coefficient");
    var = star + 1;
  }
  const std::string v = trim(s.substr(var, caret - var));
  if (v.size() != 1 || !std::isalpha(static_cast<unsigned char>(v[0])))
    throw std::invalid_argument("rule variable must be one letter: '" + text + "'");
  r.exponent = parse_num(s.substr(caret + 1), "rule exponent");
  return r;
}

std::string PowerRule::text() const {
  if (exponent == 0) return csv_double(coeff);
  const std::string base = "q^" + csv_double(exponent);
  return coeff == 1 ? base : csv_double(coeff) + "*" + base;
}

std::vector<double> Manifest::numbers(const std::string& key) const {
  auto it = grid.find(key);
  if (it == grid.end()) throw std::invalid_argument("missing grid key '" + key + "'");
  std::istringstream in(it->second);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_num(tok, key));
  if (out.empty()) throw std::invalid_argument("empty value for grid key '" + key + "'");
  return out;
}

double Manifest::number(const std::string& key) const {
  auto v = numbers(key);
  if (v.size() != 1)
    throw std::invalid_argument("grid key '" + key + "' wants a single number");
  return v[0];
}

double Manifest::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

PowerRule Manifest::rule(const std::string& key) const {
  auto it = grid.find(key);
  if (it == grid.end()) throw std::invalid_argument("missing grid key '" + key + "'");
  try {
    return PowerRule::parse(it->second);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " (grid key '" + key + "')");
  }
}

Box Manifest::box_or(const std::string& key, const Box& fallback) const {
  if (!has(key)) return fallback;
  auto v = numbers(key);
  if (v.size() % 2 != 0)
    throw std::invalid_argument("grid key '" + key + "' wants lows then highs");
  const size_t d = v.size() / 2;
  return Box(std::vector<double>(v.begin(), v.begin() + d),
             std::vector<double>(v.begin() + d, v.end()));
}

Manifest parse_manifest(std::istream& in) {
  Manifest m;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("unterminated section at " + where);
      section = trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "grid")
        throw std::invalid_argument("unknown section '" + section + "' at " + where);
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected key = value at " + where);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("empty key at " + where);
    if (section.empty())
      throw std::invalid_argument("key outside a section at " + where);
    if (section == "grid") {
      if (!m.grid.emplace(key, value).second)
        throw std::invalid_argument("duplicate grid key '" + key + "' at " + where);
      continue;
    }
    if (key == "kind")
      m.kind = value;
    else if (key == "manifold")
      m.manifold = value;
    else if (key == "output")
      m.output = value;
    else if (key == "seed")
      m.seed = static_cast<unsigned long long>(parse_num(value, "seed"));
    else if (key == "threads")
      m.threads = static_cast<int>(parse_num(value, "threads"));
    else
      throw std::invalid_argument("unknown experiment key '" + key + "' at " + where);
  }
  if (!kKinds.count(m.kind))
    throw std::invalid_argument("unknown or missing experiment kind '" + m.kind + "'");
  if (m.manifold.empty()) throw std::invalid_argument("missing manifold spec");
  if (m.threads < 1) throw std::invalid_argument("threads must be at least 1");
  for (const auto& [key, value] : m.grid)
    if (!kGridKeys.at(m.kind).count(key))
      throw std::invalid_argument("grid key '" + key + "' does not belong to kind '" +
                                  m.kind + "'");
  return m;
}

Manifest parse_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open manifest '" + path + "'");
  return parse_manifest(in);
}

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_rat(const Rat& v) {
  return boost::multiprecision::numerator(v).str() + "/" +
         boost::multiprecision::denominator(v).str();
}

namespace {

nlohmann::json base_summary(const Manifest& m) {
  return {{"kind", m.kind},
          {"manifold", m.manifold},
          {"seed", m.seed},
          {"threads", m.threads}};
}

void run_count(const Manifest& m, const Manifold& mf, ExperimentResult& r) {
  const auto Qs = m.numbers("Q");
  const PowerRule eps = m.rule("eps");
  const Box B = m.box_or("B", mf.domain());
  r.header = "Q,eps,accepted,ambiguous";
  long long total = 0;
  std::vector<double> fitQ, fitN;
  for (double Q : Qs) {
    const double e = eps(Q);
    const NearCount c = count_N(mf, B, Q, e, m.threads);
    r.rows.push_back(csv_double(Q) + "," + csv_double(e) + "," + std::to_string(c.accepted) +
                     "," + std::to_string(c.ambiguous));
    total += c.accepted;
    if (c.accepted > 0) {
      fitQ.push_back(Q);
      fitN.push_back(double(c.accepted));
    }
  }
  r.summary["total_accepted"] = total;
  r.summary["eps_rule"] = eps.text();
  if (fitQ.size() >= 3) {
    const ExponentFit fit = exponent_fit(fitQ, fitN);
    r.summary["slope"] = fit.slope;
    r.summary["slope_r2"] = fit.r2;
  }
}

void run_coverage(const Manifest& m, const Manifold& mf, ExperimentResult& r) {
  const auto Qs = m.numbers("Q");
  const PowerRule psi = m.rule("psi");
  const double delta = m.number_or("delta", 0.0);
  const double rho0 = m.number_or("rho0", 1.0);
  const Box B = m.box_or("B", mf.domain());
  const int d = mf.domain_dim(), md = mf.codomain_dim();
  r.header = "Q,psi,points,rho,fraction";
  for (double Q : Qs) {
    const double p = psi(Q);
    auto pts = enumerate_R(mf, B, Q, delta, p, m.threads);
    std::vector<std::vector<double>> centers;
    centers.reserve(pts.size());
    for (const auto& pt : pts) {
      std::vector<double> c(pt.a.size());
      for (size_t i = 0; i < pt.a.size(); ++i) c[i] = double(pt.a[i]) / double(pt.q);
      centers.push_back(std::move(c));
    }
    const double rho = rho0 * std::pow(std::pow(p, md) * std::pow(Q, d + 1), -1.0 / d);
    const double frac = coverage_measure(centers, rho, B);
    r.rows.push_back(csv_double(Q) + "," + csv_double(p) + "," +
                     std::to_string(pts.size()) + "," + csv_double(rho) + "," +
                     csv_double(frac));
  }
  r.summary["psi_rule"] = psi.text();
  r.summary["delta"] = delta;
  r.summary["rho0"] = rho0;
}

void run_cells(const Manifest& m, const Manifold& mf, ExperimentResult& r) {
  const auto Qstars = m.numbers("Qstar");
  const auto kappas = m.numbers("kappa");
  const PowerRule psistar = m.rule("psistar");
  const double c0 = m.number("c0");
  const int gridn = static_cast<int>(m.number_or("grid", 41));
  if (gridn < 3) throw std::invalid_argument("cells grid wants at least 3 points");
  const Box B = m.box_or("B", mf.domain());
  const int d = mf.domain_dim();

  // Validate every configuration before scanning anything.
  std::vector<CellParams> cps;
  for (double k : kappas)
    for (double Q : Qstars) cps.push_back(make_cell_params(mf, B, Q, psistar(Q), k, c0));

  r.header = "Qstar,kappa,x,q,residual";
  nlohmann::json configs = nlohmann::json::array();
  size_t ci = 0;
  for (double k : kappas) {
    for (double Q : Qstars) {
      const CellParams& cp = cps[ci++];
      long long good = 0, detected = 0;
      // Grid over the concentric half box, exact rational coordinates.
      std::vector<long long> idx(d, 0), top(d, gridn - 1);
      long long total = 1;
      for (int i = 0; i < d; ++i) total *= gridn;
      for (long long cell = 0; cell < total; ++cell) {
        std::vector<Rat> x(d);
        std::vector<double> xd(d);
        for (int i = 0; i < d; ++i) {
          const double lo = B.center()[i] - B.side(i) / 4;
          xd[i] = lo + B.side(i) / 2 * double(idx[i]) / double(gridn - 1);
          x[i] = scalar_traits<Rat>::from_double(xd[i]);
        }
        advance_index(idx, top);
        if (!good_set_member(mf, cp, x)) continue;
        ++good;
        const Detection det = detect(mf, cp, x);
        ++detected;
        const bool in_range = det.point.q >= 1 && double(det.point.q) <= cp.Q + 1e-9;
        if (!in_range || det.param_dist >= cp.rho || det.residual >= cp.psi) {
          r.status = 2;
          r.summary["violations"].push_back(
              {{"Qstar", Q}, {"kappa", k}, {"x", xd[0]}, {"q", det.point.q}});
        }
        std::string xs = csv_double(xd[0]);
        for (int i = 1; i < d; ++i) xs += ";" + csv_double(xd[i]);
        const std::string res = mf.polynomial() ? csv_rat(residual_exact(mf, det.point))
                                                : csv_double(det.residual);
        r.rows.push_back(csv_double(Q) + "," + csv_double(k) + "," + xs + "," +
                         std::to_string(det.point.q) + "," + res);
      }
      configs.push_back({{"Qstar", Q},
                         {"kappa", k},
                         {"psistar", cp.psistar},
                         {"scanned", total},
                         {"good", good},
                         {"detected", detected}});
    }
  }
  r.summary["c0"] = c0;
  r.summary["configs"] = configs;
}

void run_pbox_decay(const Manifest& m, const Manifold& mf, ExperimentResult& r) {
  if (mf.domain_dim() != 1)
    throw std::invalid_argument("pbox-decay drives one-parameter models");
  const auto theta = m.numbers("theta");
  const int k = mf.ambient_dim() + 1;
  if (static_cast<int>(theta.size()) != k)
    throw std::invalid_argument("theta wants " + std::to_string(k) + " entries here");
  std::vector<double> scales{1, 0.5, 0.25, 0.125};
  if (m.has("scales")) scales = m.numbers("scales");
  for (double s : scales)
    if (!(s > 0)) throw std::invalid_argument("scales must be positive");

  // Rows are the derivative matrix of the lifted curve (1, x, f(x)).
  const Manifold* mp = &mf;
  std::vector<std::function<double(double, int)>> jets;
  jets.push_back([](double, int o) { return o == 0 ? 1.0 : 0.0; });
  jets.push_back([](double x, int o) { return o == 0 ? x : (o == 1 ? 1.0 : 0.0); });
  for (int l = 0; l < mf.codomain_dim(); ++l)
    jets.push_back([mp, l](double x, int o) { return mp->curve_derivative(l, o, x); });
  const ParallelepipedFamily fam = wronski_family(std::move(jets), mf.domain());

  double grid_h = m.number_or("grid_h", 0.0);
  if (grid_h <= 0) {
    // Replicate the measurement guard: the finest scale must stay resolved.
    double rown = 0;
    for (double xq : {mf.domain().lo[0], 0.5 * (mf.domain().lo[0] + mf.domain().hi[0]),
                      mf.domain().hi[0]}) {
      for (const auto& row : fam.rows({xq})) {
        double s2 = 0;
        for (double e : row) s2 += e * e;
        rown = std::max(rown, std::sqrt(s2));
      }
    }
    const double smin = *std::min_element(scales.begin(), scales.end());
    const double tmin = *std::min_element(theta.begin(), theta.end());
    grid_h = smin * tmin / (10.5 * rown);
  }

  r.header = "scale,fraction";
  std::vector<double> fs, ss;
  for (double s : scales) {
    std::vector<double> th(theta);
    for (double& t : th) t *= s;
    const double frac = measure_A(fam, th, mf.domain(), grid_h, m.threads);
    r.rows.push_back(csv_double(s) + "," + csv_double(frac));
    if (frac > 0) {
      ss.push_back(s);
      fs.push_back(frac);
    }
  }
  r.summary["theta"] = theta;
  r.summary["grid_h"] = grid_h;
  if (ss.size() >= 3) {
    const ExponentFit fit = exponent_fit(ss, fs);
    r.summary["alpha"] = fit.slope;  // measure ~ scale^alpha
    r.summary["alpha_r2"] = fit.r2;
  }
}

void run_dual_check(const Manifest& m, const Manifold& mf, ExperimentResult& r) {
  const int gridn = static_cast<int>(m.number_or("grid", 41));
  if (gridn < 2) throw std::invalid_argument("dual-check grid wants at least 2 points");
  const DualCurve dc = dual_map(mf);
  const int n = dc.n();
  const Box inner = mf.domain().scaled(0.9);
  std::vector<double> xs(gridn);
  for (int i = 0; i < gridn; ++i)
    xs[i] = inner.lo[0] + inner.side(0) * double(i) / double(gridn - 1);

  try {
    wronskian_inequality_check(dc, xs);
  } catch (const std::runtime_error& e) {
    r.status = 2;
    r.summary["violation"] = e.what();
  }

  r.header = "x,ratio,residual";
  for (double x : xs) {
    std::string ratio;
    if (dc.symbolic()) {
      const Rat xr = scalar_traits<Rat>::from_double(x);
      Rat wy = dc.wronskian_y_exact(xr);
      if (wy < 0) wy = -wy;
      Rat wz = dc.wronskian_z_exact(xr);
      if (wz < 0) wz = -wz;
      Rat pow_wy(1);
      for (int i = 0; i < n; ++i) pow_wy *= wy;
      ratio = csv_rat(wz / pow_wy);
    } else {
      ratio = csv_double(std::fabs(dc.wronskian_z(x)) /
                         std::pow(std::fabs(dc.wronskian_y(x)), n));
    }
    const double res = dc.relation_residual(x);
    if (!dc.symbolic() && res > 1e-8) {
      r.status = 2;
      r.summary["violation"] = "triangle relation residual above 1e-8";
    }
    r.rows.push_back(csv_double(x) + "," + ratio + "," + csv_double(res));
  }
  r.summary["symbolic"] = dc.symbolic();
  if (!dc.symbolic()) r.summary["fd_error"] = dc.fd_error();
}

void run_dim(const Manifest& m, const Manifold& mf, ExperimentResult& r) {
  const double tau = m.number("tau");
  const auto Qs = m.numbers("Q");
  const Box B = m.box_or("B", Box());
  const DimEstimate est = dim_estimate(mf, tau, Qs, B, m.threads);
  r.header = "Q,scale,count";
  for (size_t i = 0; i < Qs.size(); ++i)
    r.rows.push_back(csv_double(Qs[i]) + "," + csv_double(est.scales[i]) + "," +
                     std::to_string(est.counts[i]));
  r.summary["tau"] = tau;
  r.summary["dimension"] = est.dimension;
  r.summary["slope"] = est.slope;
  r.summary["confidence"] = est.confidence;
  r.summary["r2"] = est.r2;
  r.summary["reliable"] = est.reliable;
}

void run_ubiquity(const Manifest& m, const Manifold& mf, ExperimentResult& r) {
  const auto ts = m.numbers("t");
  const PowerRule psi = m.rule("psi");
  const double rho0 = m.number_or("rho0", 1.0);
  const double qmin_factor = m.number_or("qmin_factor", 0.0);
  const Box B = m.box_or("B", mf.domain());
  const ResonantSystem rs(mf, mf.domain(), [psi](double q) { return psi(q); }, rho0);

  r.header = "t,members,rho,fraction";
  int tmax = 0;
  for (double td : ts) {
    const int t = static_cast<int>(td);
    if (double(t) != td || t < 1)
      throw std::invalid_argument("t wants whole numbers at least 1");
    tmax = std::max(tmax, t);
    const double Q = std::pow(2.0, t);
    const double frac = ubiquity_fraction(rs, t, B, qmin_factor * Q, 0, m.threads);
    r.rows.push_back(std::to_string(t) + "," +
                     std::to_string(rs.members(t, m.threads).size()) + "," +
                     csv_double(rs.rho(Q)) + "," + csv_double(frac));
  }
  r.summary["psi_rule"] = psi.text();
  r.summary["rho0"] = rho0;
  r.summary["qmin_factor"] = qmin_factor;
  r.summary["coverage_floor"] = coverage_floor(mf.domain_dim());
  // Sensitivity of the top-level fraction to the free radius multiplier.
  nlohmann::json sens;
  for (double f : {0.5, 1.0, 2.0}) {
    const ResonantSystem rv(mf, mf.domain(), [psi](double q) { return psi(q); }, rho0 * f);
    sens[csv_double(f)] = ubiquity_fraction(rv, tmax, B, qmin_factor * std::pow(2.0, tmax),
                                            0, m.threads);
  }
  r.summary["rho0_sensitivity"] = sens;
}

}  // namespace

ExperimentResult run_experiment(const Manifest& m) {
  if (!kKinds.count(m.kind))
    throw std::invalid_argument("unknown experiment kind '" + m.kind + "'");
  auto mf = manifold_from_spec(m.manifold);
  ExperimentResult r;
  r.summary = base_summary(m);
  if (m.kind == "count")
    run_count(m, *mf, r);
  else if (m.kind == "coverage")
    run_coverage(m, *mf, r);
  else if (m.kind == "cells")
    run_cells(m, *mf, r);
  else if (m.kind == "pbox-decay")
    run_pbox_decay(m, *mf, r);
  else if (m.kind == "dual-check")
    run_dual_check(m, *mf, r);
  else if (m.kind == "dim")
    run_dim(m, *mf, r);
  else
    run_ubiquity(m, *mf, r);
  r.summary["rows"] = r.rows.size();
  r.summary["status"] = r.status;
  return r;
}

void write_outputs(const ExperimentResult& r, const std::string& prefix) {
  if (prefix.empty()) throw std::runtime_error("empty output prefix");
  const std::filesystem::path csv_path(prefix + ".csv");
  std::error_code ec;
  if (csv_path.has_parent_path())
    std::filesystem::create_directories(csv_path.parent_path(), ec);
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write '" + csv_path.string() + "'");
  csv << r.header << "\n";
  for (const auto& row : r.rows) csv << row << "\n";
  csv.close();
  if (!csv) throw std::runtime_error("failed writing '" + csv_path.string() + "'");

  std::ofstream js(prefix + ".json");
  if (!js) throw std::runtime_error("cannot write '" + prefix + ".json'");
  js << r.summary.dump(2) << "\n";
  js.close();
  if (!js) throw std::runtime_error("failed writing '" + prefix + ".json'");
}

namespace {

Rat rat_rand(std::mt19937_64& rng, long long num_range, long long den_max) {
  std::uniform_int_distribution<long long> num(-num_range, num_range);
  std::uniform_int_distribution<long long> den(1, den_max);
  return Rat(num(rng), den(rng));
}

MultiVector<Rat> rand_mv(std::mt19937_64& rng, int k, int p) {
  std::vector<Rat> c(static_cast<size_t>(binomial(k, p)));
  for (auto& e : c) e = rat_rand(rng, 6, 4);
  return MultiVector<Rat>::from_coefficients(k, p, std::move(c));
}

double urand(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void require(bool cond, const std::string& what) {
  if (!cond) throw std::runtime_error(what);
}

}  // namespace

int selftest(std::ostream& out, bool flip_hodge) {
  selfcheck::flip_hodge_sign = flip_hodge;
  int failures = 0;
  const auto run = [&](const char* name, const std::function<void()>& body) {
    try {
      body();
      out << "PASS " << name << "\n";
    } catch (const std::exception& e) {
      ++failures;
      out << "FAIL " << name << ": " << e.what() << "\n";
    }
  };

  run("exterior duality against the complement", [&] {
    std::mt19937_64 rng(11);
    for (int k = 2; k <= 6; ++k) {
      const auto top = MultiVector<Rat>::basis_blade(k, (1u << k) - 1);
      for (int p = 0; p <= k; ++p)
        for (int rep = 0; rep < 8; ++rep) {
          const auto u = rand_mv(rng, k, p), v = rand_mv(rng, k, p);
          require(wedge(v, hodge(u)) == top * inner(v, u),
                  "complement identity broke at k=" + std::to_string(k) +
                      " p=" + std::to_string(p));
        }
    }
  });

  run("interior product adjoint to the wedge", [&] {
    std::mt19937_64 rng(12);
    for (int k = 3; k <= 6; ++k)
      for (int p = 1; p <= k; ++p)
        for (int q = 0; q <= p; ++q)
          for (int rep = 0; rep < 4; ++rep) {
            const auto u = rand_mv(rng, k, p), v = rand_mv(rng, k, q);
            const auto x = rand_mv(rng, k, p - q);
            require(inner(interior(u, v), x) == inner(u, wedge(v, x)),
                    "adjunction broke at k=" + std::to_string(k));
          }
  });

  run("complement applied twice is a sign", [&] {
    std::mt19937_64 rng(13);
    for (int k = 2; k <= 7; ++k)
      for (int p = 0; p <= k; ++p) {
        const auto u = rand_mv(rng, k, p);
        const bool neg = (p * (k - p)) % 2 == 1;
        require(hodge(hodge(u)) == (neg ? -u : u),
                "double complement sign broke at k=" + std::to_string(k) +
                    " p=" + std::to_string(p));
      }
  });

  run("frame projections satisfy the orthogonal split", [&] {
    std::mt19937_64 rng(14);
    for (const char* spec : {"parabola", "veronese 3"}) {
      const auto mf = manifold_from_spec(spec);
      for (int rep = 0; rep < 200; ++rep) {
        const double x = urand(rng, mf->domain().lo[0], mf->domain().hi[0]);
        const auto fr = frame_at(*mf, {x});
        std::vector<double> r(mf->ambient_dim() + 1);
        for (double& e : r) e = urand(rng, -5, 5);
        const auto ds = distance_split(fr, r);
        require(std::fabs(ds.dy * ds.dy - ds.dg * ds.dg - ds.du * ds.du) <= 1e-9,
                "projection split broke on " + std::string(spec));
      }
    }
  });

  run("rational enumeration matches a straight scan", [&] {
    const auto mf = make_parabola();
    const Box B = Box::interval(-0.75, 0.75);
    const auto fast = enumerate_R(*mf, B, 30, 0.0, 0.5);
    std::vector<RationalPoint> slow;
    for (long long q = 1; q <= 30; ++q) {
      const long long alo = static_cast<long long>(std::ceil(-0.75 * q));
      const long long ahi = static_cast<long long>(std::floor(0.75 * q));
      for (long long a = alo; a <= ahi; ++a) {
        const Rat v = Rat(a * a, q);  // q f(a/q) for f = x^2
        const long long bmid = static_cast<long long>(std::llround(double(v)));
        for (long long b = bmid - 2; b <= bmid + 2; ++b) {
          Rat res = v - b;
          if (res < 0) res = -res;
          if (res > Rat(1, 2)) continue;
          if (std::gcd(std::gcd(q, std::abs(a)), std::abs(b)) != 1) continue;
          slow.push_back({q, {a}, {b}});
        }
      }
    }
    std::sort(slow.begin(), slow.end());
    require(fast == slow, "enumeration disagrees with the scan");
  });

  run("insoluble sphere admits no near-hits", [&] {
    // |a^2 + b^2 - 3 q^2| >= 1 keeps every rational point at distance
    // > 1e-4 from the circle of squared radius 3 once q <= 50.
    const auto mf = make_circle(3);
    const NearCount c = count_N(*mf, mf->domain(), 50, 1e-4);
    require(c.accepted == 0 && c.ambiguous == 0, "found a phantom rational point");
  });

  run("threshold bodies always trap a lattice point", [&] {
    std::mt19937_64 rng(17);
    for (const char* spec : {"parabola", "veronese 3"}) {
      const auto mf = manifold_from_spec(spec);
      const int n = mf->ambient_dim(), m = mf->codomain_dim();
      const double k0 = kappa0(1, m);
      for (int rep = 0; rep < 40; ++rep) {
        const double Qstar = urand(rng, 5, 40);
        const double lob =
            std::pow(k0, -1.0 / (2 * n - 1)) * std::pow(Qstar, -3.0 / (2 * n - 1));
        const double psistar = std::min(1.0, lob * std::pow(2.0, urand(rng, 0, 3)));
        const double theta_u = 1.0 / (std::pow(psistar, m) * Qstar);
        const double x = urand(rng, mf->domain().lo[0] / 2, mf->domain().hi[0] / 2);
        const auto sol = find_integer_point(*mf, {scalar_traits<Rat>::from_double(x)},
                                            psistar, theta_u, k0 * Qstar);
        require(sol.found, "an at-threshold body came back empty");
      }
    }
  });

  run("detection certificates stay inside their bounds", [&] {
    const auto mf = make_parabola();
    const double Qstar = 200;
    const CellParams cp =
        make_cell_params(*mf, mf->domain(), Qstar, std::pow(Qstar, -0.8), 0.3, 1.0);
    int good = 0;
    for (int i = 0; i <= 20; ++i) {
      const double xd = -0.5 + double(i) / 20;
      const std::vector<Rat> x{scalar_traits<Rat>::from_double(xd)};
      if (!good_set_member(*mf, cp, x)) continue;
      ++good;
      const Detection det = detect(*mf, cp, x);
      require(det.point.q >= 1 && double(det.point.q) <= cp.Q,
              "certified denominator out of range");
      require(det.param_dist < cp.rho, "certified point too far in parameter");
      require(det.residual < cp.psi, "certified residual too large");
    }
    require(good > 0, "no good parameters in the scan");
  });

  run("parallelepiped membership matches brute force", [&] {
    std::vector<std::function<double(double, int)>> jets = {
        [](double, int o) { return o == 0 ? 1.0 : 0.0; },
        [](double x, int o) { return o == 0 ? x : o == 1 ? 1.0 : 0.0; },
        [](double x, int o) {
          return o == 0 ? x * x : o == 1 ? 2 * x : o == 2 ? 2.0 : 0.0;
        },
    };
    const auto fam = wronski_family(std::move(jets), Box::interval(-1, 1));
    const std::vector<double> theta{0.9, 1.1, 2.2};
    for (int i = 0; i <= 24; ++i) {
      const double x = -1 + 2.0 * i / 24;
      bool brute = false;
      for (int a0 = -5; a0 <= 5 && !brute; ++a0)
        for (int a1 = -5; a1 <= 5 && !brute; ++a1)
          for (int a2 = -2; a2 <= 2 && !brute; ++a2) {
            if (!a0 && !a1 && !a2) continue;
            brute = std::fabs(a0 + a1 * x + a2 * x * x) <= theta[0] &&
                    std::fabs(a1 + 2.0 * a2 * x) <= theta[1] &&
                    std::fabs(2.0 * a2) <= theta[2];
          }
      require(membership_A(fam, theta, {x}) == brute,
              "membership mismatch at x=" + std::to_string(x));
    }
  });

  run("sublevel constants of monomials", [&] {
    const auto lin = good_estimate([](const std::vector<double>& x) { return x[0]; },
                                   Box::interval(0, 1), 1.0);
    require(std::fabs(lin.C - 1.0) <= 0.05,
            "linear sublevel constant drifted to " + std::to_string(lin.C));
    const auto sq =
        good_estimate([](const std::vector<double>& x) { return x[0] * x[0]; },
                      Box::interval(-1, 1), 0.5);
    require(sq.C >= 0.9 && sq.C <= 2.1,
            "square sublevel constant drifted to " + std::to_string(sq.C));
  });

  run("dual curve identities", [&] {
    const auto v2 = make_veronese(2);
    const DualCurve d2 = dual_map(*v2);
    for (int i = 0; i < 20; ++i) {
      const Rat x(2 * i - 19, 25);
      Rat wy = d2.wronskian_y_exact(x);
      if (wy < 0) wy = -wy;
      Rat wz = d2.wronskian_z_exact(x);
      if (wz < 0) wz = -wz;
      require(wz == wy * wy, "determinant pair lost its exact equality");
      require(d2.relation_residual(double(x)) == 0.0, "symbolic residual nonzero");
    }
    const auto c3 = make_circle(3);
    const DualCurve dc = dual_map(*c3);
    std::vector<double> xs;
    const Box inner = c3->domain().scaled(0.9);
    for (int i = 0; i <= 12; ++i)
      xs.push_back(inner.lo[0] + inner.side(0) * double(i) / 12);
    const WronskianReport rep = wronskian_inequality_check(dc, xs);
    require(rep.min_ratio >= 1 - 1e-9, "determinant comparison dipped below one");
    for (double x : xs)
      require(dc.relation_residual(x) <= 1e-8, "numeric dual identities drifted");
  });

  run("resonant levels nest and transfer", [&] {
    const auto mf = make_parabola();
    const ResonantSystem rs(
        *mf, Box::interval(-1, 1), [](double q) { return std::pow(q, -0.8); }, 1.0);
    const auto m4 = rs.members(4), m6 = rs.members(6);
    require(m4.size() <= m6.size() &&
                std::includes(m6.begin(), m6.end(), m4.begin(), m4.end()),
            "levels are not nested");
    const TransferReport tr = transfer_check(rs, 5, 4, 99);
    require(tr.samples > 0 && tr.violations == 0 && tr.worst_margin < 1.0,
            "near-hits failed to transfer");
  });

  run("parallel runs reproduce the single-thread answer", [&] {
    const auto mf = make_parabola();
    const Box B = Box::interval(-1, 1);
    const NearCount c1 = count_N(*mf, B, 120, 0.02, 1);
    const NearCount c4 = count_N(*mf, B, 120, 0.02, 4);
    require(c1.accepted == c4.accepted && c1.ambiguous == c4.ambiguous,
            "counts changed with the thread count");
    require(enumerate_R(*mf, B, 40, 0.0, 0.3, 1) == enumerate_R(*mf, B, 40, 0.0, 0.3, 3),
            "enumeration changed with the thread count");
    const ResonantSystem rs(
        *mf, B, [](double q) { return std::pow(q, -0.8); }, 1.0);
    require(ubiquity_fraction(rs, 6, B, 0, 0, 1) == ubiquity_fraction(rs, 6, B, 0, 0, 4),
            "coverage changed with the thread count");
  });

  selfcheck::flip_hodge_sign = false;
  return failures;
}

void print_catalog(std::ostream& out) {
  out << "models (value for 'manifold ='):\n";
  for (const char* spec : {"parabola", "veronese 2", "veronese 3", "veronese 4",
                           "circle 1", "circle 3", "power-block 2 2 1"}) {
    const auto mf = manifold_from_spec(spec);
    out << "  " << spec << ": d=" << mf->domain_dim() << " m=" << mf->codomain_dim()
        << " domain=[" << csv_double(mf->domain().lo[0]) << ","
        << csv_double(mf->domain().hi[0]) << "]"
        << (mf->domain_dim() > 1 ? "^" + std::to_string(mf->domain_dim()) : "") << " "
        << (mf->polynomial() ? "polynomial" : "smooth") << "\n";
  }
  out << "\nexperiment kinds (CSV columns | grid keys, * = optional):\n"
      << "  count      Q,eps,accepted,ambiguous      | Q eps *B\n"
      << "  coverage   Q,psi,points,rho,fraction     | Q psi *delta *rho0 *B\n"
      << "  cells      Qstar,kappa,x,q,residual      | Qstar kappa psistar c0 *grid *B\n"
      << "  pbox-decay scale,fraction                | theta *scales *grid_h\n"
      << "  dual-check x,ratio,residual              | *grid\n"
      << "  dim        Q,scale,count                 | tau Q *B\n"
      << "  ubiquity   t,members,rho,fraction        | t psi *rho0 *qmin_factor *B\n"
      << "\nthreshold rules accept \"0.02\", \"Q^-2.2\" or \"0.5*q^-0.8\".\n"
      << "boxes list lows then highs: \"B = -0.5 0.5\".\n";
}

}  // namespace ratnear
