#pragma once

#include <string>
#include <vector>

#include "cylev/config.hpp"
#include "cylev/stats.hpp"

namespace cylev {

// One workflow each; every runner writes its artifacts under
// cfg.output_dir and returns a process exit code (0 = all checks passed).
int run_simulate(const ExperimentConfig& cfg);
int run_radonify(const ExperimentConfig& cfg);
int run_verify(const ExperimentConfig& cfg);
int run_convergence(const ExperimentConfig& cfg);
int run_cf_check(const ExperimentConfig& cfg);

// Dispatch by command name and write the run-metadata file (the only
// artifact carrying a timestamp).
int run_command(const ExperimentConfig& cfg, const std::string& command);

// The verify suite without file output; exposed for tests.
std::vector<TestReport> verify_suite(const ExperimentConfig& cfg);

}  // namespace cylev
