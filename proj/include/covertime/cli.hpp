#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace covertime::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `covertime` invocation; args excludes the program name.
/// Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses `start:stop:step` (start included; values past stop by more than
/// 1e-9 step excluded) or a comma-separated list. The result is finite,
/// nonempty and strictly increasing, otherwise DomainError.
std::vector<double> parse_grid(std::string_view text);

/// 17 significant digits, `.` decimal separator.
std::string format_number(double x);

}  // namespace covertime::cli
