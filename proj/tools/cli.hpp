#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bellsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitModel = 3;

/// Runs the command line `args` (without the program name). Scientific
/// verdicts never affect the exit code; only operational failures do.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bellsim::cli
