#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace kpline {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,      // invalid configuration, bad arguments, unreadable or unwritable paths
  kExitHalted = 3,      // numeric halt or a failed pipeline stage
  kExitAcceptance = 4,  // at least one acceptance criterion failed
};

using EnvLookup = std::function<const char*(const char*)>;

// Runs one subcommand. `args` excludes the program name. Environment overrides
// (KPLINE_<SECTION>_<KEY>) are read through `env`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env);

}  // namespace kpline
