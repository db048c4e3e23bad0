// Batch experiment driver used by the command-line tool: manifest parsing,
// the experiment kinds (count, coverage, cells, pbox-decay, dual-check,
// dim, ubiquity), deterministic CSV/JSON emission, the invariant selftest
// and the model catalog.
//
// Manifest format (line oriented, '#' starts a comment):
//
//   [experiment]
//   kind = count            # one of the seven kinds above
//   manifold = circle 3     # model spec, see manifold_from_spec
//   output = out/run1       # prefix for run1.csv / run1.json
//   seed = 7                # optional, default 1
//   threads = 2             # optional, default 1
//
//   [grid]
//   Q = 50 100 200 400      # whitespace-separated lists
//   eps = Q^-2.2            # rules: a constant, Q^a, or c*Q^a
//
// Grid keys by kind:
//   count       Q, eps[, B]
//   coverage    Q, psi[, delta, rho0, B]
//   cells       Qstar, kappa, psistar, c0[, grid, B]
//   pbox-decay  theta[, scales, grid_h]
//   dual-check  [grid]
//   dim         tau, Q[, B]
//   ubiquity    t, psi[, rho0, qmin_factor, B]

#pragma once

#include "ratnear/box.hpp"
#include "ratnear/scalar.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ratnear {

// Threshold rule: coeff * q^exponent.  Parses "0.02", "Q^-2.2" and
// "0.5*q^-0.8" (the variable letter is free).
struct PowerRule {
  double coeff = 1;
  double exponent = 0;
  double operator()(double q) const;
  static PowerRule parse(const std::string& text);
  std::string text() const;
};

struct Manifest {
  std::string kind;
  std::string manifold;
  std::string output;
  unsigned long long seed = 1;
  int threads = 1;
  std::map<std::string, std::string> grid;

  bool has(const std::string& key) const { return grid.count(key) != 0; }
  // All throw std::invalid_argument on missing keys or malformed values.
  std::vector<double> numbers(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  PowerRule rule(const std::string& key) const;
  Box box_or(const std::string& key, const Box& fallback) const;
};

// Parses and validates the static structure (sections, key syntax, known
// keys, kind name).  Kind-specific grid validation happens in
// run_experiment before any work starts.
Manifest parse_manifest(std::istream& in);
Manifest parse_manifest_file(const std::string& path);

struct ExperimentResult {
  std::string header;             // CSV header line
  std::vector<std::string> rows;  // CSV data lines in canonical order
  nlohmann::json summary;
  int status = 0;  // nonzero iff a hard invariant failed during the run
};

// Runs one experiment.  Deterministic for a fixed (manifest, seed): the row
// order never depends on the thread count.  Throws std::invalid_argument
// for malformed requests before producing any result.
ExperimentResult run_experiment(const Manifest& m);

// Writes prefix.csv and prefix.json, creating parent directories.  Throws
// std::runtime_error when the path cannot be written.
void write_outputs(const ExperimentResult& r, const std::string& prefix);

// Full-precision decimal for doubles and exact fraction text for rationals;
// every number a result file contains goes through one of these.
std::string csv_double(double v);
std::string csv_rat(const Rat& v);

// Runs the invariant suite of every module at fixed seeds, printing one
// PASS/FAIL line per invariant and a summary; returns 0 iff all pass.
// flip_hodge injects a sign defect into the orthogonal complement for the
// duration, to prove the suite catches a broken duality.
int selftest(std::ostream& out, bool flip_hodge = false);

// Human-readable list of the model specs and experiment kinds.
void print_catalog(std::ostream& out);

}  // namespace ratnear
