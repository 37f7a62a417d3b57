#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace edgesplit::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
  kExecutionError = 3,
};

// Runs one subcommand (fit, plan, simulate, run, report). `args` excludes the
// program name. Results go to `out` unless --out names a file.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edgesplit::cli
