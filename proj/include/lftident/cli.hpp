#pragma once

#include <exception>
#include <iosfwd>

namespace lftident::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchema = "lftident.report/1";

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInvalidModel = 2,
  kAssumptionViolation = 3,
  kNumericalInconsistency = 4,
};

/// Exit code for an error escaping a subcommand.
int exit_code_for(const std::exception& e);

/// Entry point shared by the executable and the tests. Reports go to --output
/// (or `out` when absent); diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lftident::cli
