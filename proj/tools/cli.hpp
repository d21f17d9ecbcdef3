#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arknls::cli {

/// Runs the benchmark runner on `args` (argv without the program name).
/// Returns 0 on success, 1 on runtime errors and 2 on flag errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arknls::cli
