#pragma once

// Command-line front end. Every file written through --out gets a sibling
// "<out>.manifest.json" recording the command, the effective arguments and
// content hashes, so `disfl replay` can regenerate the artifact.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace disfl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

std::string_view tool_version();

/// `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace disfl::cli
