#pragma once

#include <ostream>

namespace mctrack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

/// Subcommands: track, eval-motion, eval-clear, generate, ablate.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mctrack::cli
