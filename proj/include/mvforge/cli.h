#pragma once

#include <ostream>

namespace mvforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitRejects = 2;

// Entry point of the `mvforge` executable. Data goes to files or `out`,
// diagnostics to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mvforge
