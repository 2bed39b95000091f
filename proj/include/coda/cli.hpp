#pragma once

#include <string>
#include <vector>

namespace coda::cli {

// exit codes shared by every subcommand
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitComputeError = 3;
inline constexpr int kExitConfigContradiction = 4;

/// Entry point behind main(): subcommands ingest | tune | forecast |
/// evaluate with --config PATH --out DIR [--seed N] [--threads N].
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // without argv[0]

}  // namespace coda::cli
