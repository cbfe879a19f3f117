#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pfsensor::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitValidationFailure = 3;

/// Runs the command line `args` (without the program name); returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pfsensor::app
