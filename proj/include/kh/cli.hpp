#pragma once

#include <ostream>
#include <span>
#include <string>

namespace kh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

// Default total step count for `simulate`; the last 30 snapshots
// (steps 155..300 every 5) are kept.
inline constexpr long kDefaultSteps = 300;
inline constexpr std::size_t kDefaultGrid = 128;

// args excludes the program name.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace kh::cli
