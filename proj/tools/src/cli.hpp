#pragma once

#include <iosfwd>

namespace msstop::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitNotConverged = 3;

/// Entry point of the `msstop` command. Subcommands: simulate, fit,
/// bootstrap, select, loglik, oracle-check.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace msstop::cli
