#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace skelvol {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUserError = 1, kExitInternalError = 2 };

/// Entry point of the `skelvol` tool; args[0] is the program name.
/// Subcommands: gen, encode, train, eval, inspect.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace skelvol
