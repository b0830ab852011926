#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mvlevy::cli {

/// Runs one command line (program name excluded). Exit codes: 0 success,
/// 1 runtime error, 2 invalid configuration or failed assumption.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mvlevy::cli
