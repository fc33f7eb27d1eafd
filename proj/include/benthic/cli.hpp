#pragma once

#include <string>
#include <vector>

namespace benthic::cli {

/// Entry point. Returns 0 on success, 2 on usage or validation errors
/// (message names the flag), 1 on runtime failures.
int run(int argc, char** argv);
/// Same, with arguments after the program name.
int run(const std::vector<std::string>& args);

}  // namespace benthic::cli
