#pragma once

#include <iosfwd>

namespace contmodel::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kParseError = 2;
inline constexpr int kValidationError = 3;
inline constexpr int kBudgetError = 4;
inline constexpr int kPanelMismatch = 5;

/// Runs one command. Payload goes to `out` (or --out FILE), diagnostics and
/// the run record to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace contmodel::cli
