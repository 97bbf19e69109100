#pragma once

// Command-line front end. `run` takes the arguments after the program name so
// tests can drive it in-process.
//
// Exit codes: 0 success, 1 usage/config/input errors, 2 when the data violate a
// compatibility condition or (with --check-hypotheses) a solvability hypothesis.

#include <ostream>
#include <string>
#include <vector>

namespace cfheat::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_incompatible = 2;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Shortest-independent fixed format: 17 significant digits, '.' decimal point.
std::string format_double(double v);

}  // namespace cfheat::cli
