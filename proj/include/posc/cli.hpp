#pragma once

// Command-line front end. The `posc` executable is a thin wrapper around
// dispatch() so tests can drive every subcommand in-process.

#include <iosfwd>
#include <string>
#include <vector>

namespace posc::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one subcommand; `args` excludes the program name.
/// Exit codes: 0 success, 2 invalid input (flags, files, parameters), 1 runtime failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace posc::cli
