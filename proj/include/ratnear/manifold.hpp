// Monge models: graphs x -> (x, f(x)) with f : B0 subset R^d -> R^m.
//
// Two kinds exist.  Polynomial models evaluate exactly over Rat and expose
// exact jets; smooth models (the circle arc) evaluate through 50-digit
// floats internally and hand back doubles.  n = d + m is the ambient
// dimension of the graph.

#pragma once

#include "ratnear/box.hpp"
#include "ratnear/polynomial.hpp"
#include "ratnear/scalar.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ratnear {

// Order-2 jet of f at a point: value, first and second partials.
struct Jet {
  std::vector<double> f;                              // [l]
  std::vector<std::vector<double>> df;                // [l][i]
  std::vector<std::vector<std::vector<double>>> d2f;  // [l][i][j]
};

struct JetExact {
  std::vector<Rat> f;
  std::vector<std::vector<Rat>> df;
  std::vector<std::vector<std::vector<Rat>>> d2f;
};

class Manifold {
 public:
  Manifold(int d, int m, Box domain, std::string name, bool polynomial);
  virtual ~Manifold() = default;

  int domain_dim() const { return d_; }
  int codomain_dim() const { return m_; }
  int ambient_dim() const { return d_ + m_; }
  const Box& domain() const { return domain_; }
  const std::string& name() const { return name_; }
  bool polynomial() const { return polynomial_; }

  virtual std::vector<double> eval(const std::vector<double>& x) const = 0;
  virtual Jet jet(const std::vector<double>& x) const = 0;

  // Exact paths; polynomial models override these, others reject.
  virtual std::vector<Rat> eval_exact(const std::vector<Rat>& x) const;
  virtual JetExact jet_exact(const std::vector<Rat>& x) const;

  // Single-component derivative of arbitrary order, curves (d == 1) only.
  virtual double curve_derivative(int l, int order, double x) const = 0;
  virtual Rat curve_derivative_exact(int l, int order, const Rat& x) const;

  // Smallest constant c with |f(x) - f(x')| <= c |x - x'| on the domain,
  // estimated by grid sampling of the Jacobian and inflated for safety.
  double lipschitz() const;

  // Ascending coefficient rows of the components for polynomial curves
  // (d == 1), empty otherwise.  Lets hot loops run Horner without touching
  // the virtual interface.
  virtual std::vector<std::vector<double>> curve_coefficients() const { return {}; }

  // Models whose graph lies on the sphere |point|^2 = r report r here,
  // enabling exact distance decisions; all others report 0.
  virtual double sphere_level() const { return 0; }

 private:
  int d_, m_;
  Box domain_;
  std::string name_;
  bool polynomial_;
  mutable double lip_ = -1;
};

// Catalog.
std::unique_ptr<Manifold> make_veronese(int n);            // (x, x^2, ..., x^n) on [-0.9, 0.9]
std::unique_ptr<Manifold> make_parabola();                 // (x, x^2) on [-1, 1]
std::unique_ptr<Manifold> make_circle(double r);           // (x, sqrt(r - x^2))
std::unique_ptr<Manifold> make_power_block(int d, int m, int k);  // f_l = x_d^(k+l)

// Text form used by config files: "veronese 3", "parabola", "circle 3",
// "power-block 2 2 1".
std::unique_ptr<Manifold> manifold_from_spec(const std::string& spec);

// Exact domain membership for rational parameters (bounds are the exact
// rationals the double endpoints denote).
bool domain_contains_exact(const Manifold& mf, const std::vector<Rat>& x);

}  // namespace ratnear
