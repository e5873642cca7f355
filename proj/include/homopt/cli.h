#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace homopt::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { kPass = 0, kDomainFailure = 1, kUsageError = 2 };

/// Runs the command line `args` (without the program name).
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int Run(int argc, char** argv);

}  // namespace homopt::cli
