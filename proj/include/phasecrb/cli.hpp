#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phasecrb::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kBadFlags = 2,
  kNumerical = 3,
  kOracleMismatch = 4,
};

inline constexpr const char* kSeedEnvVar = "PHASECRB_SEED";
inline constexpr double kOracleTolerance = 1e-8;

/// Entry point of the `phasecrb` tool; `args` excludes the program name.
/// Data goes to `out` (or --output), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phasecrb::cli
