#pragma once

#include <iosfwd>

namespace qwalk::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalViolation = 3, kDegenerate = 4 };

/// Full command-line entry point. Results go to files (or `out` for JSON
/// without --out); diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qwalk::cli
