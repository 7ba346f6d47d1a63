#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace rpoa {

/// Unsigned 256-bit integer. Holds mining thresholds and truncated hash values.
/// Arithmetic wraps modulo 2^256.
class Uint256 {
public:
    static constexpr unsigned kBits = 256;

    constexpr Uint256() = default;
    constexpr explicit Uint256(std::uint64_t v) : limbs_{v, 0, 0, 0} {}

    static Uint256 from_u128(unsigned __int128 v);
    /// 2^n for n < 256.
    static Uint256 pow2(unsigned n);
    /// 2^bits - 1 for bits in [1, 256].
    static Uint256 all_ones(unsigned bits);
    static Uint256 from_big_endian(std::span<const std::uint8_t, 32> bytes);
    static std::optional<Uint256> from_hex(std::string_view hex);

    [[nodiscard]] std::array<std::uint8_t, 32> to_big_endian() const;
    /// Lower-case hex, zero-padded to ceil(bits/4) digits.
    [[nodiscard]] std::string to_hex(unsigned bits = kBits) const;
    [[nodiscard]] unsigned bit_length() const;
    [[nodiscard]] bool is_zero() const { return (limbs_[0] | limbs_[1] | limbs_[2] | limbs_[3]) == 0; }
    /// Nearest-ish double; exact for values below 2^53.
    [[nodiscard]] double to_double() const;
    [[nodiscard]] std::uint64_t limb(std::size_t i) const { return limbs_[i]; }

    Uint256 operator<<(unsigned shift) const;
    Uint256 operator>>(unsigned shift) const;
    Uint256 operator+(const Uint256& rhs) const;
    Uint256 operator-(const Uint256& rhs) const;

    friend bool operator==(const Uint256&, const Uint256&) = default;
    friend std::strong_ordering operator<=>(const Uint256& a, const Uint256& b);

private:
    std::array<std::uint64_t, 4> limbs_{}; // little-endian limbs
};

} // namespace rpoa
