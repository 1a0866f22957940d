#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace imtrack::cli {

inline constexpr const char* kVersion = "0.1.0";

// Runs one subcommand; returns the process exit code
// (0 success, 1 numerical failure, 2 invalid input).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(const std::string& bytes);

}  // namespace imtrack::cli
