#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace manakov::cli {

enum ExitCode { ok = 0, input_error = 2, numerical_failure = 3, case_violation = 4 };

/// Runs one subcommand; args excludes the program name. Reports go to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace manakov::cli
