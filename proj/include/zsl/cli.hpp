#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace zsl {

// Runs the command line `args` (without the program name). Returns 0 on
// success, 1 on data, usage or configuration errors and 2 on anything else.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zsl
