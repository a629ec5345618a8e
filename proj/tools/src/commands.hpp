#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dicoh::cli {

inline constexpr const char* kDataRootEnv = "DICOH_DATA_ROOT";

// Runs one CLI invocation; args excludes the program name. Returns the
// process exit code: 0 success, 1 runtime failure, 2 usage or
// configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dicoh::cli
