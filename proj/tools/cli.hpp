#pragma once

#include <ostream>

namespace gknet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Entry point for the gknet command line; returns the process exit code.
/// Results go to `out`, progress and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gknet::cli
