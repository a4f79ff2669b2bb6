#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ckidx::cli {

inline constexpr int kJsonSchemaVersion = 1;

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kRuntimeError = 3,
};

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ckidx::cli
