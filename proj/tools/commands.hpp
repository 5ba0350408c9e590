#pragma once

#include <string>

#include "bergman/errors.hpp"
#include "cli_config.hpp"

namespace bergman::cli {

enum ExitCode : int { kPass = 0, kInvariantFailure = 1, kConfigError = 2, kEstimationFailure = 3 };

int exit_code_for(ErrorKind kind) noexcept;

struct RunResult {
  int exit_code = kPass;
  std::string message;
  json summary;  // also written to <out>/summary.json
};

// Runs the configured command, writing resolved_config.json, CSV reports and
// summary.json into cfg.output_dir.  Library errors are mapped to exit codes.
RunResult run_command(const RunConfig& cfg);

// Reports differ between reruns only on lines carrying this marker.
inline constexpr const char* kTimestampKey = "generated_at";

}  // namespace bergman::cli
