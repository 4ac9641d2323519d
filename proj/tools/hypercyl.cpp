// Experiment runner: hypercyl <suite> --config <path> [--seed N]
// [--workers K] [--out DIR].  Exit codes: 0 success, 2 bad invocation or
// config, 3 when a suite reports check/audit violations.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hypercyl/report.hpp"
#include "hypercyl/suites.hpp"

int main(int argc, char** argv) {
  CLI::App app{"replicated experiments on hyperbolic cylinder shadows, "
               "sphere cap processes, and fractal retention grids"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int workers = 1;

  std::vector<CLI::App*> subs;
  for (const auto& name : hypercyl::suites::suite_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key=value config file")
        ->required();
    sub->add_option("--seed", seed, "base seed (default 1)");
    sub->add_option("--workers", workers, "worker threads (default 1)")
        ->check(CLI::Range(1, 1024));
    sub->add_option("--out", out_dir, "output directory (default .)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto cfg = hypercyl::report::ExperimentConfig::load(config_path);
    hypercyl::suites::SuiteOptions opts;
    opts.seed = seed;
    opts.workers = workers;
    opts.out_dir = out_dir;
    const auto& names = hypercyl::suites::suite_names();
    for (size_t i = 0; i < names.size(); ++i)
      if (subs[i]->parsed())
        return hypercyl::suites::run_suite(names[i], cfg, opts);
    std::cerr << "error: no suite selected\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
