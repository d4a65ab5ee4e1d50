#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace foresight::cli {

// Entry point for the `foresight` command. Returns the process exit code:
// 0 success, 1 usage, 2 config error, 3 gateway exhaustion, 4 data error.
int run(const std::vector<std::string>& args);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace foresight::cli
