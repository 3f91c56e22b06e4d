#pragma once

#include <iosfwd>

namespace rfet::cli {

/// Runs the command line and returns the process exit code:
/// 0 success, 2 config error, 3 solver non-convergence,
/// 4 feasibility or monotonicity violation.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rfet::cli
