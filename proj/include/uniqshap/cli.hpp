#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uniqshap::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInputError = 1,
    kCorrectnessFailure = 2,
};

/// Runs one command line (args exclude the program name). Primary output goes
/// to `out` unless --output names a file; diagnostics and timings go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uniqshap::cli
