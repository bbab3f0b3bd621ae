#pragma once

#include <iosfwd>

namespace mammosynth {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitPartialFailure = 1,  // batch entries failed (report still written) or verify mismatch
  kExitConfigError = 2,     // invalid flags, unreadable inputs, unwritable outputs
};

/// Entry point of the `mammosynth` command-line tool. Data goes to `out`,
/// diagnostics to `err`; errors are a single `error[<kind>]: <message>` line.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mammosynth
