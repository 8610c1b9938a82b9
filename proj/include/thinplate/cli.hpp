#pragma once

#include <iosfwd>

namespace thinplate {

enum ExitCode : int { ExitOk = 0, ExitCheckFailed = 1, ExitConfigError = 2, ExitSolverFailed = 3 };

/// Runs one subcommand (check-density, q2, solve2d, solve3d, converge). The
/// summary goes to out, errors to err, artifacts to the output directory.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace thinplate
