#pragma once

#include <ostream>

namespace mzrom::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kDivergence = 3 };

/// Full command-line entry point; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mzrom::cli
