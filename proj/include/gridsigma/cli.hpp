#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gridsigma::cli {

/// Runs one command line (without the program name). Returns the exit
/// status: 0 success, 1 domain error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridsigma::cli
