#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace deltabox::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 1,
    exit_solver = 2,
    exit_io = 3,
};

/// Runs one invocation: `args[0]` is the program name, `args[1]` the subcommand.
/// Reports go to `out`, error messages to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

} // namespace deltabox::cli
