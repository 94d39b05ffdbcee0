#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace triplesplit::cli {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

/// Suites: identities, reductions, admm-equivalence, rates, all.
/// Throws UsageError for an unknown suite name.
std::vector<CheckResult> run_verify_suite(const std::string &suite);

/// Prints one line per check; 0 iff every check passes, 1 otherwise.
int cmd_verify(const std::string &suite, std::ostream &out);

} // namespace triplesplit::cli
