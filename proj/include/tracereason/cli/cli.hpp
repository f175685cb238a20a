#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tracereason::cli {

enum ExitCode : int {
  kConsistent = 0,
  kViolations = 1,
  kError = 2,
};

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`. ANSI colour is used for text reports only when
/// `outIsTerminal` is set and TRACEREASON_COLOR is not `never`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool outIsTerminal = false);

}  // namespace tracereason::cli
