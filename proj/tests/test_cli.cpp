#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ratnear/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ratnear;

namespace {

Manifest from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_manifest(in);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("power rules parse the documented shapes") {
  const PowerRule c = PowerRule::parse("0.02");
  CHECK(c.coeff == doctest::Approx(0.02));
  CHECK(c.exponent == 0.0);
  CHECK(c(123.0) == doctest::Approx(0.02));

  const PowerRule p = PowerRule::parse("Q^-2.2");
  CHECK(p.coeff == 1.0);
  CHECK(p.exponent == doctest::Approx(-2.2));
  CHECK(p(100.0) == doctest::Approx(std::pow(100.0, -2.2)));

  const PowerRule s = PowerRule::parse(" 0.5*q^-0.8 ");
  CHECK(s.coeff == doctest::Approx(0.5));
  CHECK(s(2.0) == doctest::Approx(0.5 * std::pow(2.0, -0.8)));

  CHECK(PowerRule::parse(PowerRule::parse("0.5*q^-0.8").text()).coeff ==
        doctest::Approx(0.5));
  CHECK(PowerRule::parse("t^1.5").exponent == doctest::Approx(1.5));

  CHECK_THROWS_AS(PowerRule::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(PowerRule::parse("qq^2"), std::invalid_argument);
  CHECK_THROWS_AS(PowerRule::parse("q^"), std::invalid_argument);
  CHECK_THROWS_AS(PowerRule::parse("1.2.3"), std::invalid_argument);
  CHECK_THROWS_AS(PowerRule::parse("2x*q^1"), std::invalid_argument);
}

TEST_CASE("manifest parsing accepts the documented shape") {
  const Manifest m = from_text(
      "# comment line\n"
      "[experiment]\n"
      "kind = count          # trailing comment\n"
      "manifold = parabola\n"
      "output = /tmp/somewhere\n"
      "seed = 9\n"
      "threads = 2\n"
      "\n"
      "[grid]\n"
      "Q = 10 20 40\n"
      "eps = 0.05\n");
  CHECK(m.kind == "count");
  CHECK(m.manifold == "parabola");
  CHECK(m.output == "/tmp/somewhere");
  CHECK(m.seed == 9);
  CHECK(m.threads == 2);
  CHECK(m.numbers("Q") == std::vector<double>{10, 20, 40});
  CHECK(m.number("eps") == doctest::Approx(0.05));
  CHECK(m.number_or("missing", 3.5) == 3.5);
  CHECK_FALSE(m.has("B"));

  const Box b = m.box_or("B", Box::interval(-1, 1));
  CHECK(b.lo[0] == -1.0);
}

TEST_CASE("manifest parsing rejects malformed input") {
  CHECK_THROWS_AS(from_text("kind = count\n"), std::invalid_argument);  // no section
  CHECK_THROWS_AS(from_text("[experiment]\nkind = count\n"),
                  std::invalid_argument);  // missing manifold
  CHECK_THROWS_AS(from_text("[experiment]\nkind = nope\nmanifold = parabola\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(from_text("[experiment]\nkind = count\nmanifold = parabola\n"
                            "color = red\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(from_text("[weird]\nkind = count\n"), std::invalid_argument);
  CHECK_THROWS_AS(from_text("[experiment\nkind = count\n"), std::invalid_argument);
  CHECK_THROWS_AS(from_text("[experiment]\nkind = count\nmanifold = parabola\n"
                            "[grid]\njust a line\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(from_text("[experiment]\nkind = count\nmanifold = parabola\n"
                            "[grid]\nQ = 1\nQ = 2\n"),
                  std::invalid_argument);
  // Grid keys are tied to the experiment kind.
  CHECK_THROWS_AS(from_text("[experiment]\nkind = count\nmanifold = parabola\n"
                            "[grid]\ntau = 1\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(from_text("[experiment]\nkind = count\nmanifold = parabola\n"
                            "threads = 0\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_manifest_file("/no/such/file.manifest"),
                  std::invalid_argument);
}

TEST_CASE("validation happens before any work starts") {
  // Empty value for a required grid key.
  Manifest m = from_text(
      "[experiment]\nkind = count\nmanifold = parabola\n[grid]\nQ =\neps = 0.05\n");
  CHECK_THROWS_AS(run_experiment(m), std::invalid_argument);

  // Missing required key.
  m = from_text("[experiment]\nkind = count\nmanifold = parabola\n[grid]\nQ = 10\n");
  CHECK_THROWS_AS(run_experiment(m), std::invalid_argument);

  // A single number where a list is not allowed.
  m = from_text(
      "[experiment]\nkind = dim\nmanifold = parabola\n[grid]\ntau = 1 2\nQ = "
      "4 8 16 32\n");
  CHECK_THROWS_AS(run_experiment(m), std::invalid_argument);

  // Kind-specific validation: too few dimension scales.
  m = from_text(
      "[experiment]\nkind = dim\nmanifold = parabola\n[grid]\ntau = 0.75\nQ = 4 8 16\n");
  CHECK_THROWS_AS(run_experiment(m), std::invalid_argument);

  // Cells parameters outside the admissible window.
  m = from_text(
      "[experiment]\nkind = cells\nmanifold = parabola\n[grid]\nQstar = 200\n"
      "kappa = 1.5\npsistar = Q^-0.8\nc0 = 1\n");
  CHECK_THROWS_AS(run_experiment(m), std::exception);

  // Wrong theta arity for the lifted parabola.
  m = from_text(
      "[experiment]\nkind = pbox-decay\nmanifold = parabola\n[grid]\ntheta = 1 2\n");
  CHECK_THROWS_AS(run_experiment(m), std::invalid_argument);

  // Whole-number levels only.
  m = from_text(
      "[experiment]\nkind = ubiquity\nmanifold = parabola\n[grid]\nt = 2.5\n"
      "psi = q^-0.8\n");
  CHECK_THROWS_AS(run_experiment(m), std::invalid_argument);
}

TEST_CASE("count runs are deterministic across repeats and threads") {
  const std::string text =
      "[experiment]\nkind = count\nmanifold = parabola\nseed = 5\n"
      "[grid]\nQ = 20 30 40\neps = 0.05\n";
  Manifest m = from_text(text);
  const ExperimentResult a = run_experiment(m);
  const ExperimentResult b = run_experiment(m);
  CHECK(a.header == "Q,eps,accepted,ambiguous");
  CHECK(a.rows.size() == 3);
  CHECK(a.rows == b.rows);
  CHECK(a.summary.dump() == b.summary.dump());

  m.threads = 3;
  const ExperimentResult c = run_experiment(m);
  CHECK(a.rows == c.rows);
  CHECK(a.status == 0);
}

TEST_CASE("insoluble circle starves the count experiment") {
  const Manifest m = from_text(
      "[experiment]\nkind = count\nmanifold = circle 3\n"
      "[grid]\nQ = 20 40\neps = 0.0001\n");
  const ExperimentResult r = run_experiment(m);
  for (const auto& row : r.rows) {
    std::istringstream cells(row);
    std::string q, eps, accepted;
    std::getline(cells, q, ',');
    std::getline(cells, eps, ',');
    std::getline(cells, accepted, ',');
    CHECK(accepted == "0");
  }
  CHECK(r.summary["total_accepted"] == 0);
}

TEST_CASE("symbolic dual checks report exact unit ratios") {
  const Manifest m = from_text(
      "[experiment]\nkind = dual-check\nmanifold = veronese 2\n[grid]\ngrid = 9\n");
  const ExperimentResult r = run_experiment(m);
  CHECK(r.status == 0);
  CHECK(r.rows.size() == 9);
  for (const auto& row : r.rows) {
    std::istringstream cells(row);
    std::string x, ratio, residual;
    std::getline(cells, x, ',');
    std::getline(cells, ratio, ',');
    std::getline(cells, residual, ',');
    CHECK(ratio == "1/1");
    CHECK(residual == "0");
  }
  CHECK(r.summary["symbolic"] == true);
}

TEST_CASE("cells runs certify their detections exactly") {
  const Manifest m = from_text(
      "[experiment]\nkind = cells\nmanifold = parabola\n[grid]\n"
      "Qstar = 200\nkappa = 0.3\npsistar = Q^-0.8\nc0 = 1\ngrid = 21\n");
  const ExperimentResult r = run_experiment(m);
  CHECK(r.status == 0);
  CHECK(r.rows.size() > 0);
  for (const auto& row : r.rows) CHECK(row.find('/') != std::string::npos);
  CHECK(r.summary["configs"][0]["good"] == r.rows.size());
}

TEST_CASE("decay and coverage kinds expose their fitted summaries") {
  Manifest m = from_text(
      "[experiment]\nkind = pbox-decay\nmanifold = parabola\n[grid]\n"
      "theta = 0.4 1.2 16\nscales = 1 0.5 0.25\n");
  const ExperimentResult decay = run_experiment(m);
  CHECK(decay.rows.size() == 3);
  CHECK(decay.summary.contains("alpha"));

  m = from_text(
      "[experiment]\nkind = coverage\nmanifold = parabola\n[grid]\n"
      "Q = 32 64\npsi = q^-0.8\n");
  const ExperimentResult cov = run_experiment(m);
  CHECK(cov.rows.size() == 2);
  for (const auto& row : cov.rows) {
    const double frac = std::stod(row.substr(row.rfind(',') + 1));
    CHECK(frac > 0.0);
    CHECK(frac <= 1.0);
  }
}

TEST_CASE("dimension and ubiquity kinds run end to end") {
  Manifest m = from_text(
      "[experiment]\nkind = dim\nmanifold = parabola\n[grid]\n"
      "tau = 0.75\nQ = 8 16 32 64\n");
  const ExperimentResult dim = run_experiment(m);
  CHECK(dim.rows.size() == 4);
  CHECK(dim.summary.contains("dimension"));
  CHECK(dim.summary.contains("r2"));

  m = from_text(
      "[experiment]\nkind = ubiquity\nmanifold = parabola\nthreads = 2\n[grid]\n"
      "t = 3 4\npsi = q^-0.8\n");
  const ExperimentResult ub = run_experiment(m);
  CHECK(ub.rows.size() == 2);
  CHECK(ub.summary["rho0_sensitivity"].size() == 3);
  CHECK(ub.summary["coverage_floor"] == doctest::Approx(0.25));
  for (const auto& row : ub.rows) {
    const double frac = std::stod(row.substr(row.rfind(',') + 1));
    CHECK(frac > 0.0);
    CHECK(frac <= 1.0);
  }
}

TEST_CASE("outputs round-trip through the filesystem") {
  const Manifest m = from_text(
      "[experiment]\nkind = dual-check\nmanifold = veronese 2\n[grid]\ngrid = 5\n");
  const ExperimentResult r = run_experiment(m);

  const auto dir = std::filesystem::temp_directory_path() / "ratnear-cli-test";
  std::filesystem::remove_all(dir);
  const std::string prefix = (dir / "nested" / "run1").string();
  write_outputs(r, prefix);

  const std::string csv = slurp(prefix + ".csv");
  CHECK(csv.rfind("x,ratio,residual\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

  nlohmann::json js = nlohmann::json::parse(slurp(prefix + ".json"));
  CHECK(js["kind"] == "dual-check");
  CHECK(js["rows"] == 5);

  // Byte-identical on a rewrite.
  write_outputs(r, prefix);
  CHECK(slurp(prefix + ".csv") == csv);

  CHECK_THROWS_AS(write_outputs(r, ""), std::runtime_error);
  CHECK_THROWS_AS(write_outputs(r, "/dev/null/sub/run"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("full-precision doubles and exact fractions in csv fields") {
  CHECK(csv_double(0.1) == "0.10000000000000001");
  CHECK(csv_double(1.0) == "1");
  CHECK(std::stod(csv_double(std::sqrt(2.0))) == std::sqrt(2.0));
  CHECK(csv_rat(Rat(3, 4)) == "3/4");
  CHECK(csv_rat(Rat(-7, 85)) == "-7/85");
  CHECK(csv_rat(Rat(0)) == "0/1");
}

TEST_CASE("selftest passes clean and fails under the planted defect") {
  std::ostringstream clean;
  CHECK(selftest(clean, false) == 0);
  CHECK(clean.str().find("FAIL") == std::string::npos);
  CHECK(clean.str().find("PASS exterior duality") != std::string::npos);

  std::ostringstream broken;
  CHECK(selftest(broken, true) > 0);
  CHECK(broken.str().find("FAIL exterior duality") != std::string::npos);

  // The mutation hook is restored afterwards.
  std::ostringstream again;
  CHECK(selftest(again, false) == 0);
}

TEST_CASE("catalog lists every model and kind") {
  std::ostringstream out;
  print_catalog(out);
  const std::string text = out.str();
  for (const char* needle : {"parabola", "veronese 3", "circle 3", "power-block",
                             "count", "coverage", "cells", "pbox-decay",
                             "dual-check", "dim", "ubiquity"})
    CHECK(text.find(needle) != std::string::npos);
}
