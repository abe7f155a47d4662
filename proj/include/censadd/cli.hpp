#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace censadd {

/// Runs the command-line front-end on `args` (without the program name).
/// Returns the process exit code: 0 ok, 1 input error, 2 assumption
/// violation, 3 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace censadd
