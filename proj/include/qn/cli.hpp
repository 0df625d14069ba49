#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qn {

/// Exit codes: 0 success, 1 solver or check failure, 2 usage or input error.
enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_usage = 2 };

/// Entry point behind the qnopt binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qn
