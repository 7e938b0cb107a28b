#pragma once

#include <iosfwd>

namespace rstab {

/// Exit codes of the command-line front end.
enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_cap = 2, exit_check_failed = 3 };

/// Entry point of the `rstab` tool, separated from main() for testing.
/// Subcommands: compute, oracle, interp-check.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace rstab
