#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "streamcheck/stats.hpp"

namespace streamcheck {

// Process exit codes of the command-line runner.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,  // argument parsing, or an unexpected engine failure
  kExitInvalidConfig = 2,
  kExitUnreachableSource = 3,
  kExitAllBackendsFailed = 4,
};

// Runs one source to completion. Errors go to `err` as one line each; the
// report goes to `out` (or `err` when the JSONL itself is sent to `out`).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Per-speaker table with a totals row and the topic histogram.
std::string format_report_table(const StatsSnapshot& snapshot);

}  // namespace streamcheck
