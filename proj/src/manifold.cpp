#include "ratnear/manifold.hpp"

#include "ratnear/numutil.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ratnear {
namespace {

Rat rat_pow(const Rat& x, int e) {
  Rat acc(1);
  for (int i = 0; i < e; ++i) acc *= x;
  return acc;
}

// Falling factorial e (e-1) ... (e-j+1) as a long; exponents stay tiny.
long fall(int e, int j) {
  long acc = 1;
  for (int i = 0; i < j; ++i) acc *= (e - i);
  return acc;
}

}  // namespace

Manifold::Manifold(int d, int m, Box domain, std::string name, bool polynomial)
    : d_(d), m_(m), domain_(std::move(domain)), name_(std::move(name)),
      polynomial_(polynomial) {
  if (d < 1 || m < 1) throw std::invalid_argument("model needs d >= 1 and m >= 1");
  if (domain_.dim() != d) throw std::invalid_argument("domain dimension != d");
  if (d + m + 1 > kMaxDim)
    throw std::invalid_argument("ambient dimension exceeds supported maximum");
}

std::vector<Rat> Manifold::eval_exact(const std::vector<Rat>&) const {
  throw std::logic_error("exact evaluation requires a polynomial model");
}

JetExact Manifold::jet_exact(const std::vector<Rat>&) const {
  throw std::logic_error("exact jets require a polynomial model");
}

Rat Manifold::curve_derivative_exact(int, int, const Rat&) const {
  throw std::logic_error("exact derivatives require a polynomial model");
}

double Manifold::lipschitz() const {
  if (lip_ >= 0) return lip_;
  const int per_axis = d_ <= 2 ? 64 : 16;
  std::vector<int> idx(d_, 0);
  std::vector<double> x(d_);
  double worst = 0;
  for (;;) {
    for (int i = 0; i < d_; ++i)
      x[i] = domain_.lo[i] + domain_.side(i) * idx[i] / double(per_axis - 1);
    Jet j = jet(x);
    double frob = 0;
    for (int l = 0; l < m_; ++l)
      for (int i = 0; i < d_; ++i) frob += j.df[l][i] * j.df[l][i];
    worst = std::max(worst, std::sqrt(frob));
    int axis = 0;
    while (axis < d_ && ++idx[axis] == per_axis) idx[axis++] = 0;
    if (axis == d_) break;
  }
  lip_ = 1.25 * worst;
  return lip_;
}

namespace {

class PolynomialCurve : public Manifold {
 public:
  PolynomialCurve(std::vector<Polynomial<Rat>> comps, Box domain, std::string name)
      : Manifold(1, static_cast<int>(comps.size()), std::move(domain), std::move(name),
                 true),
        comps_(std::move(comps)) {}

  std::vector<double> eval(const std::vector<double>& x) const override {
    std::vector<double> out(codomain_dim());
    for (int l = 0; l < codomain_dim(); ++l) out[l] = comps_[l].eval_double(x[0]);
    return out;
  }

  Jet jet(const std::vector<double>& x) const override {
    Jet j;
    j.f = eval(x);
    j.df.assign(codomain_dim(), std::vector<double>(1));
    j.d2f.assign(codomain_dim(), {{0.0}});
    for (int l = 0; l < codomain_dim(); ++l) {
      j.df[l][0] = comps_[l].derivative().eval_double(x[0]);
      j.d2f[l][0][0] = comps_[l].derivative(2).eval_double(x[0]);
    }
    return j;
  }

  std::vector<Rat> eval_exact(const std::vector<Rat>& x) const override {
    std::vector<Rat> out(codomain_dim());
    for (int l = 0; l < codomain_dim(); ++l) out[l] = comps_[l].eval(x[0]);
    return out;
  }

  JetExact jet_exact(const std::vector<Rat>& x) const override {
    JetExact j;
    j.f = eval_exact(x);
    j.df.assign(codomain_dim(), std::vector<Rat>(1));
    j.d2f.assign(codomain_dim(), {{Rat(0)}});
    for (int l = 0; l < codomain_dim(); ++l) {
      j.df[l][0] = comps_[l].derivative().eval(x[0]);
      j.d2f[l][0][0] = comps_[l].derivative(2).eval(x[0]);
    }
    return j;
  }

  double curve_derivative(int l, int order, double x) const override {
    return comps_[l].derivative(order).eval_double(x);
  }

  Rat curve_derivative_exact(int l, int order, const Rat& x) const override {
    return comps_[l].derivative(order).eval(x);
  }

  std::vector<std::vector<double>> curve_coefficients() const override {
    std::vector<std::vector<double>> rows;
    for (const auto& p : comps_) {
      std::vector<double> row;
      for (const auto& c : p.coefficients())
        row.push_back(scalar_traits<Rat>::to_double(c));
      rows.push_back(std::move(row));
    }
    return rows;
  }

 private:
  std::vector<Polynomial<Rat>> comps_;
};

class PowerBlock : public Manifold {
 public:
  PowerBlock(int d, int m, int k, Box domain, std::string name)
      : Manifold(d, m, std::move(domain), std::move(name), true), k_(k) {}

  int exponent(int l) const { return k_ + l + 1; }

  std::vector<double> eval(const std::vector<double>& x) const override {
    std::vector<double> out(codomain_dim());
    for (int l = 0; l < codomain_dim(); ++l) out[l] = std::pow(x.back(), exponent(l));
    return out;
  }

  Jet jet(const std::vector<double>& x) const override {
    const int d = domain_dim(), m = codomain_dim();
    Jet j;
    j.f = eval(x);
    j.df.assign(m, std::vector<double>(d, 0));
    j.d2f.assign(m, std::vector<std::vector<double>>(d, std::vector<double>(d, 0)));
    const double t = x.back();
    for (int l = 0; l < m; ++l) {
      int e = exponent(l);
      j.df[l][d - 1] = fall(e, 1) * std::pow(t, e - 1);
      j.d2f[l][d - 1][d - 1] = fall(e, 2) * std::pow(t, e - 2);
    }
    return j;
  }

  std::vector<Rat> eval_exact(const std::vector<Rat>& x) const override {
    std::vector<Rat> out(codomain_dim());
    for (int l = 0; l < codomain_dim(); ++l) out[l] = rat_pow(x.back(), exponent(l));
    return out;
  }

  JetExact jet_exact(const std::vector<Rat>& x) const override {
    const int d = domain_dim(), m = codomain_dim();
    JetExact j;
    j.f = eval_exact(x);
    j.df.assign(m, std::vector<Rat>(d, Rat(0)));
    j.d2f.assign(m, std::vector<std::vector<Rat>>(d, std::vector<Rat>(d, Rat(0))));
    const Rat& t = x.back();
    for (int l = 0; l < m; ++l) {
      int e = exponent(l);
      j.df[l][d - 1] = Rat(fall(e, 1)) * rat_pow(t, e - 1);
      j.d2f[l][d - 1][d - 1] = Rat(fall(e, 2)) * rat_pow(t, e - 2);
    }
    return j;
  }

  double curve_derivative(int l, int order, double x) const override {
    if (domain_dim() != 1) throw std::logic_error("curve derivatives need d == 1");
    int e = exponent(l);
    if (order > e) return 0;
    return fall(e, order) * std::pow(x, e - order);
  }

  Rat curve_derivative_exact(int l, int order, const Rat& x) const override {
    if (domain_dim() != 1) throw std::logic_error("curve derivatives need d == 1");
    int e = exponent(l);
    if (order > e) return Rat(0);
    return Rat(fall(e, order)) * rat_pow(x, e - order);
  }

  std::vector<std::vector<double>> curve_coefficients() const override {
    if (domain_dim() != 1) return {};
    std::vector<std::vector<double>> rows;
    for (int l = 0; l < codomain_dim(); ++l) {
      std::vector<double> row(exponent(l) + 1, 0.0);
      row.back() = 1.0;
      rows.push_back(std::move(row));
    }
    return rows;
  }

 private:
  int k_;
};

// Upper arc x -> sqrt(r - x^2).  All evaluation runs through 50-digit
// floats so that double outputs are correctly rounded far below any
// comparison tolerance.
class CircleArc : public Manifold {
 public:
  CircleArc(double r, Box domain, std::string name)
      : Manifold(1, 1, std::move(domain), std::move(name), false), r_(r) {
    if (!(r > 0)) throw std::invalid_argument("circle needs r > 0");
    double half = 0.5 * std::sqrt(r);
    if (this->domain().lo[0] < -half || this->domain().hi[0] > half)
      throw std::invalid_argument("circle domain too close to the arc endpoints");
  }

  std::vector<double> eval(const std::vector<double>& x) const override {
    return {deriv(0, x[0])};
  }

  Jet jet(const std::vector<double>& x) const override {
    Jet j;
    j.f = {deriv(0, x[0])};
    j.df = {{deriv(1, x[0])}};
    j.d2f = {{{deriv(2, x[0])}}};
    return j;
  }

  double curve_derivative(int l, int order, double x) const override {
    if (l != 0) throw std::out_of_range("circle has one component");
    return deriv(order, x);
  }

  double sphere_level() const override { return r_; }

 private:
  double deriv(int order, double x) const {
    HiFloat X(x), R(r_);
    HiFloat u = R - X * X;
    if (u <= 0) throw std::domain_error("circle evaluated outside the arc");
    HiFloat s = sqrt(u);
    HiFloat val;
    switch (order) {
      case 0: val = s; break;
      case 1: val = -X / s; break;
      case 2: val = -R / (u * s); break;
      case 3: val = -3 * R * X / (u * u * s); break;
      case 4: val = -3 * R * (R + 4 * X * X) / (u * u * u * s); break;
      default:
        throw std::out_of_range("circle derivatives implemented to order 4");
    }
    return val.convert_to<double>();
  }

  double r_;
};

std::string format_radius(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", r);
  return buf;
}

}  // namespace

std::unique_ptr<Manifold> make_veronese(int n) {
  if (n < 2 || n + 2 > kMaxDim)
    throw std::invalid_argument("veronese degree out of range");
  std::vector<Polynomial<Rat>> comps;
  for (int j = 2; j <= n; ++j) comps.push_back(Polynomial<Rat>::monomial(j));
  return std::make_unique<PolynomialCurve>(std::move(comps), Box::interval(-0.9, 0.9),
                                           "veronese " + std::to_string(n));
}

std::unique_ptr<Manifold> make_parabola() {
  std::vector<Polynomial<Rat>> comps{Polynomial<Rat>::monomial(2)};
  return std::make_unique<PolynomialCurve>(std::move(comps), Box::interval(-1, 1),
                                           "parabola");
}

std::unique_ptr<Manifold> make_circle(double r) {
  double half = 0.5 * std::sqrt(r);
  return std::make_unique<CircleArc>(r, Box::interval(-half, half),
                                     "circle " + format_radius(r));
}

std::unique_ptr<Manifold> make_power_block(int d, int m, int k) {
  if (d < 1 || m < 1 || k < 0) throw std::invalid_argument("bad power block parameters");
  Box domain(std::vector<double>(d, -0.9), std::vector<double>(d, 0.9));
  std::string name = "power-block " + std::to_string(d) + " " + std::to_string(m) + " " +
                     std::to_string(k);
  return std::make_unique<PowerBlock>(d, m, k, std::move(domain), std::move(name));
}

std::unique_ptr<Manifold> manifold_from_spec(const std::string& spec) {
  std::istringstream in(spec);
  std::string kind;
  in >> kind;
  if (kind == "veronese") {
    int n;
    if (!(in >> n)) throw std::invalid_argument("veronese needs a degree");
    return make_veronese(n);
  }
  if (kind == "parabola") return make_parabola();
  if (kind == "circle") {
    double r;
    if (!(in >> r)) throw std::invalid_argument("circle needs a radius squared");
    return make_circle(r);
  }
  if (kind == "power-block") {
    int d, m, k;
    if (!(in >> d >> m >> k)) throw std::invalid_argument("power-block needs d m k");
    return make_power_block(d, m, k);
  }
  throw std::invalid_argument("unknown manifold spec: " + spec);
}

bool domain_contains_exact(const Manifold& mf, const std::vector<Rat>& x) {
  const Box& b = mf.domain();
  if (static_cast<int>(x.size()) != b.dim()) return false;
  for (int i = 0; i < b.dim(); ++i)
    if (x[i] < Rat(b.lo[i]) || x[i] > Rat(b.hi[i])) return false;
  return true;
}

}  // namespace ratnear
