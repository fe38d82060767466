#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fmloc::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalError = 3, kConfigMismatch = 4 };

/// Exit code for an error kind (see fmloc::Error::kind()).
int exit_code_for(const std::string& kind);

/// Runs one command line (without the program name). Results go to `out`,
/// diagnostics and warnings to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fmloc::cli
