#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace accdor::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace accdor::cli
