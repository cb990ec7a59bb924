#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qfals::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInputInvalid = 2, kCheckFailed = 3 };

/// Runs one command line (args exclude the program name). The human summary
/// goes to `out`, diagnostics to `err`; `--json FILE` also writes the report.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfals::cli
