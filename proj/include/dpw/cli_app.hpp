#pragma once

#include <string>
#include <vector>

namespace dpw {

// Entry point of the dpwkit command-line tool.  Returns the process exit
// code: 0 success, 1 verification failure, 2 input error, 3 numerical
// breakdown.
int run_cli(int argc, const char* const* argv);

// Convenience overload for in-process callers; `args` excludes the program
// name.
int run_cli(const std::vector<std::string>& args);

}  // namespace dpw
