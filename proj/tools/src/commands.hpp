#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mirrorscan::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitConfig = 2,
    kExitNumeric = 3,
    kExitAnalysis = 4,
};

/// Runs the command line `args` (args[0] is the program name). Reports go to
/// `out`, diagnostics to `err`. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mirrorscan::cli
