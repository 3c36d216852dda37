#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pkgrelax {

// Process exit codes of the pkgrelax tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,       // parse, schema, validation and usage errors
  kExitInfeasible = 3,  // `solve` found no package
  kExitCapacity = 4,    // enumeration cap or node limit exceeded
  kExitGeneration = 5,  // `bench` could not generate a feasible workload
};

// Runs one invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace pkgrelax
