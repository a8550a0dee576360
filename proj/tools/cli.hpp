#pragma once

#include <string>
#include <vector>

namespace phoenix::cli {

/// Runs the command line given argv[1..]. Returns the process exit code:
/// 0 on success, 1 on usage errors, 2 on data or convergence errors.
int run(const std::vector<std::string>& args);

}  // namespace phoenix::cli
