#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fastphase::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitUsage = 64;

// Parses and runs one command line. Output goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fastphase::cli
