#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace rpoa {

using Digest = std::array<std::uint8_t, 32>;

/// SHA-256 of a byte string.
Digest sha256(std::span<const std::uint8_t> data);

std::string to_hex(const Digest& digest);

} // namespace rpoa
