#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scanpick::cli {

/// Exit codes: 0 success, 1 input/parse error, 2 degenerate estimates (a_hat >= b_hat).
enum ExitCode : int { kOk = 0, kInputError = 1, kDegenerate = 2 };

/// Runs one invocation. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scanpick::cli
