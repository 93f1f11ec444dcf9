#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace upw::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kData = 2,
    kNumerical = 3,
};

// args excludes the program name. Data goes to files or `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace upw::cli
