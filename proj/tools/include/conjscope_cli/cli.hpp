#pragma once

#include <ostream>

namespace conjscope::cli {

enum ExitCode : int {
  kOk = 0,
  kUserError = 1,
  kRegularityFailure = 2,
  kViolated = 3,
};

/// Entry point of the conjscope tool: `analyze`, `sweep` and `catalog`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace conjscope::cli
