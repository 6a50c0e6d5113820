#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coca::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericalError = 3;

/// Runs the tool on `args` (program name excluded). Diagnostics go to `err`,
/// help text and summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coca::cli
