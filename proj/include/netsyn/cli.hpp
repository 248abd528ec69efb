#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace netsyn {

/// Exit codes of the command line front end.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitInconclusive = 2 };

/// Runs one subcommand (analyze, synthesize, generate, compare, trace).
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace netsyn
