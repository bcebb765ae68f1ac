#pragma once

namespace gwasdl::cli {

/// Exit codes: 0 success, 1 usage or configuration error, 2 data or model error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Parses argv, runs one subcommand and maps failures onto the exit codes.
int run(int argc, char** argv);

}  // namespace gwasdl::cli
