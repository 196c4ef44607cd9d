#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace attnbn::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitInvalidArgument = 2,
  kExitIo = 3,
  kExitDivergence = 4,
  kExitUnsupportedVariant = 5,
};

/// Runs one command line (args[0] is the program name). Never throws; failures
/// are reported on `err` and mapped to an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Variant string for an ablation label (A, B, bottleneck-atrous, bottleneck-pe,
/// bottleneck, bottleneck+object).
std::string variant_for_label(const std::string& label);

}  // namespace attnbn::cli
