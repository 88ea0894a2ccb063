#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace edr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Format version stamped into every artifact.
inline constexpr const char* kArtifactVersion = "edr/1";

/// Runs one command line; args excludes the program name.
/// Returns kExitOk, kExitUsage (bad flags or subcommand) or kExitData (bad input files).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edr::cli
