#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ctax::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kParse = 3,
  kValidation = 4,
  kInfeasible = 5,
  kNoConvergence = 6,
  kSolveFailure = 7,
};

// Runs one command line (without the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace ctax::cli
