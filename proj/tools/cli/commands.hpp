#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coopreg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Parses the command line and runs the chosen subcommand. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload for tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace coopreg::cli
