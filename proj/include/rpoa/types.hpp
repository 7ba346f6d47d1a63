#pragma once

#include <cstdint>
#include <string>

namespace rpoa {

/// Trusted account identifier. The simulator has no signatures; identities are plain names.
using AccountId = std::string;

/// Block height. Genesis is height 0.
using Height = std::uint64_t;

/// Ledger currency in integer base units ("atoms"). All ledger arithmetic is exact.
using Amount = std::int64_t;

inline constexpr Amount kAtomsPerCoin = 100'000'000;

/// Rounds a real-valued coin amount to the nearest atom. Throws std::domain_error on
/// non-finite input or when the result does not fit in an Amount.
Amount to_atoms(double coins);

double to_coins(Amount atoms);

} // namespace rpoa
