#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ddgroup {

inline constexpr const char* kVersion = "0.1.0";

// Command-line entry point shared by the binary and the tests. args holds
// everything after the program name. Returns the process exit code: zero
// exactly when every output file of the command was written. Failures print
// one JSON line {"error": "..."} to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddgroup
