#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace psi::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFormat = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitUsage = 64;

// Runs the psi command line with args (without the program name), writing
// results to out and diagnostics to err. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace psi::cli
