#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oabe::tools {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kUsageError = 2 };

/// Entry point of the `oabe` command line (stats, estimate, benchmark, synth).
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace oabe::tools
