#pragma once

#include <string>
#include <vector>

namespace genplan::cli {

//! Command-line entry point. Subcommands: plan, pool, learn, verify, width.
//! Exit codes: 0 success, 1 usage or input error, 2 no solution or learning
//! failure, 3 budget exhausted, 4 internal error.
int run(int argc, const char* const* argv);

//! Same, without the program name (convenience for tests).
int run(const std::vector<std::string>& args);

}  // namespace genplan::cli
