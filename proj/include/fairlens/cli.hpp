#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fairlens::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Runs one command line (without the program name). Returns 0 on success or
/// a passing gate, 1 when a fairness or diagnostic check fails, and 2 for
/// usage errors and unreadable or invalid input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fairlens::cli
