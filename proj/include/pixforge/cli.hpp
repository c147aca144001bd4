#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pixforge::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

/// Parse and dispatch one invocation. args[0] is the program name.
/// Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace pixforge::cli
