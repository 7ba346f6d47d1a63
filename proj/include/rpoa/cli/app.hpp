#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rpoa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitScenario = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitUsage = 64;

/// Seed used when neither a scenario file nor --seed supplies one.
inline constexpr std::uint64_t kDefaultSeed = 1;

/// Entry point of the `rpoa` tool. `args` excludes the program name.
int run_app(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rpoa::cli
