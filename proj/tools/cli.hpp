#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace motrl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitInvariant = 2;

/// Runs the command line `args` (args[0] is the program name). Reports and
/// listings go to `out` unless --out names a file; diagnostics go to `err`.
/// Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace motrl::cli
