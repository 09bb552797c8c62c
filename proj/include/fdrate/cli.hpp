#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdrate::cli {

enum ExitCode { kOk = 0, kUsage = 2, kInputError = 3, kNumericError = 4 };

/// Runs the fd_rater command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fdrate::cli
