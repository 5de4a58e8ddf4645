#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dho::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailed = 1,
  kInvalidConfig = 2,
  kIntegrationFailed = 3,
  kTruncationUnstable = 4,
};

/// Entry point behind the `dho` executable. `args` excludes the program name.
/// Data goes to `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dho::cli
