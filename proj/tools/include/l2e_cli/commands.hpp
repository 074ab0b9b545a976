#pragma once

#include <iosfwd>

namespace l2e::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kSolverError = 3 };

/// Runs `l2e <subcommand> ...` with argv[0] as the program name. Messages go to
/// `out` and `err`; result files are written only after the command succeeds.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace l2e::cli
