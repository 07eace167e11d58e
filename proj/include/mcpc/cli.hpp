#pragma once

#include <iosfwd>

namespace mcpc {

/// Exit statuses of the command-line tool.
enum ExitStatus : int {
    kExitOk = 0,
    kExitInfeasible = 1,
    kExitInputError = 2,
    kExitDivergence = 3,
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "MCPC_OUT_DIR";

/// Entry point behind the mcpc executable. Reports go to out, diagnostics to err.
[[nodiscard]] int run_command(int argc, const char* const* argv, std::ostream& out,
                              std::ostream& err);

}  // namespace mcpc
