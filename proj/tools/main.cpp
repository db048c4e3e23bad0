#include "ratnear/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <stdexcept>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"rational points near curves: experiments and invariant checks"};
  app.require_subcommand(1);

  std::string manifest_path, out_prefix, mutate;
  unsigned long long seed = 0;
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "run an experiment manifest");
  run->add_option("manifest", manifest_path, "manifest file")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed, "override the manifest seed");
  CLI::Option* thr_opt =
      run->add_option("--threads", threads, "override the manifest thread count");
  CLI::Option* out_opt = run->add_option(
      "--out", out_prefix, "output prefix; writes <prefix>.csv and <prefix>.json");

  CLI::App* self = app.add_subcommand("selftest", "run the invariant suite");
  self->add_option("--mutate", mutate, "inject a deliberate defect")
      ->check(CLI::IsMember({"hodge-sign"}));

  CLI::App* cat = app.add_subcommand("catalog", "list models and experiment kinds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) {
      ratnear::Manifest m = ratnear::parse_manifest_file(manifest_path);
      if (seed_opt->count() > 0) m.seed = seed;
      if (thr_opt->count() > 0) m.threads = threads;
      if (out_opt->count() > 0) m.output = out_prefix;
      if (m.threads < 1) throw std::invalid_argument("threads must be at least 1");
      if (m.output.empty())
        throw std::invalid_argument(
            "no output prefix: set output= in the manifest or pass --out");
      const ratnear::ExperimentResult r = ratnear::run_experiment(m);
      ratnear::write_outputs(r, m.output);
      std::cout << r.summary.dump(2) << "\n";
      if (r.status != 0) std::cerr << "hard invariant failed; see the summary\n";
      return r.status;
    }
    if (app.got_subcommand(self)) {
      const int failures = ratnear::selftest(std::cout, mutate == "hodge-sign");
      if (failures == 0) {
        std::cout << "selftest: all checks passed\n";
        return 0;
      }
      std::cout << "selftest: " << failures << " check(s) failed\n";
      return 1;
    }
    if (app.got_subcommand(cat)) ratnear::print_catalog(std::cout);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
