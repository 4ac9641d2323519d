#pragma once

// Experiment suites behind the CLI.  Each suite reads its parameters from a
// flat key=value config, runs replicated experiments (replicate-indexed
// streams, so results are byte-identical for any worker count), and writes
// CSV plus optional SVG/PGM into the output directory.

#include <cstdint>
#include <string>
#include <vector>

#include "hypercyl/report.hpp"

namespace hypercyl::suites {

struct SuiteOptions {
  uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = ".";
};

// All runnable suite names, in CLI listing order.
const std::vector<std::string>& suite_names();

// Runs one suite.  Returns 0 on success and 3 when the suite detected
// check/audit violations.  Bad parameters throw std::invalid_argument (the
// CLI maps that to exit code 2).
int run_suite(const std::string& name, const report::ExperimentConfig& cfg,
              const SuiteOptions& opts);

}  // namespace hypercyl::suites
