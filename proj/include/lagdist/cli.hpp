#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lagdist::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs the command line `args` (args[0] is the program name) and returns the
// process exit code. Subcommands: simulate, estimate, evaluate, experiment.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lagdist::cli
