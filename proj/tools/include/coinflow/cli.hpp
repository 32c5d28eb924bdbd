#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coinflow/error.hpp"
#include "coinflow/oracle.hpp"

namespace coinflow::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kInvariant = 3,
  kCapacity = 4,
  kVerification = 5,
};

int exit_code(ErrorCode code) noexcept;

struct Hooks {
  // Replaces the count formula in `verify`.
  std::optional<LambdaFn> lambda;
};

// args excludes the program name, e.g. {"exact", "--model", "individual", ...}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Hooks& hooks = {});

// --threads value, else COINFLOW_THREADS, else the hardware count.
unsigned resolve_threads(std::optional<unsigned> flag);

}  // namespace coinflow::cli
