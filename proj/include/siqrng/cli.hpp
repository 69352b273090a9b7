#pragma once

#include <iosfwd>

namespace siqrng {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitAbort = 2,
  kExitStatFailure = 3,
  kExitIo = 4,
};

/// Entry point of the `siqrng` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace siqrng
