#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace triplesplit::cli {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitUsage = 2,
};

/// Entry point shared by the executable and the integration tests.
/// `args` excludes the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

} // namespace triplesplit::cli
