#ifndef KK_RUNNER_HPP
#define KK_RUNNER_HPP

#include <string>
#include <vector>

#include "kk/scenario.hpp"

namespace kk {

// Deterministic exit codes per failure class.
enum ExitCode {
  kOk = 0,
  kFailure = 1,        // unclassified
  kConfigError = 2,    // scenario / configuration / domain errors
  kThresholdFail = 3,  // comparison above threshold (or span mismatch)
  kIntegrationFail = 4,
  kNonconvergence = 5,
};

struct RunResult {
  int exit_code = kOk;
  std::vector<std::string> artifacts;  // files written
  std::string summary;                 // one line per scenario for the harness
};

// Execute the scenario's run.command and write artifacts under out_dir
// (priority: argument > scenario [output] > $KK_OUT_DIR > "out").
RunResult run_scenario(const Scenario& sc, const std::string& out_dir_override = "",
                       unsigned seed = 0);

std::string resolve_out_dir(const Scenario& sc, const std::string& out_dir_override);

}  // namespace kk

#endif
