#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace tfs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRuntime = 3;

// Entry point for the `tfs` tool; args[0] is the program name.
// Subcommands: gen, train, classify, eval, audit.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace tfs::cli
