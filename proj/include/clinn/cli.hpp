#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clinn {

// Exit codes of the `clinn` tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitRuntime = 3,
};

// Runs the `clinn` command line. `args` excludes the program name.
int RunCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clinn
