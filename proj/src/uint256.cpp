#include "rpoa/uint256.hpp"

#include <bit>
#include <stdexcept>

namespace rpoa {

Uint256 Uint256::from_u128(unsigned __int128 v)
{
    Uint256 r;
    r.limbs_[0] = static_cast<std::uint64_t>(v);
    r.limbs_[1] = static_cast<std::uint64_t>(v >> 64);
    return r;
}

Uint256 Uint256::pow2(unsigned n)
{
    if (n >= kBits)
        throw std::out_of_range("Uint256::pow2 exponent out of range");
    Uint256 r;
    r.limbs_[n / 64] = std::uint64_t{1} << (n % 64);
    return r;
}

Uint256 Uint256::all_ones(unsigned bits)
{
    if (bits == 0 || bits > kBits)
        throw std::out_of_range("Uint256::all_ones width out of range");
    Uint256 r;
    for (unsigned i = 0; i < 4; ++i) {
        const unsigned lo = i * 64;
        if (bits >= lo + 64)
            r.limbs_[i] = ~std::uint64_t{0};
        else if (bits > lo)
            r.limbs_[i] = (std::uint64_t{1} << (bits - lo)) - 1;
    }
    return r;
}

Uint256 Uint256::from_big_endian(std::span<const std::uint8_t, 32> bytes)
{
    Uint256 r;
    for (std::size_t i = 0; i < 32; ++i) {
        const std::size_t bit_pos = (31 - i) * 8;
        r.limbs_[bit_pos / 64] |= std::uint64_t{bytes[i]} << (bit_pos % 64);
    }
    return r;
}

std::optional<Uint256> Uint256::from_hex(std::string_view hex)
{
    if (hex.empty() || hex.size() > 64)
        return std::nullopt;
    Uint256 r;
    for (char c : hex) {
        unsigned digit;
        if (c >= '0' && c <= '9')
            digit = static_cast<unsigned>(c - '0');
        else if (c >= 'a' && c <= 'f')
            digit = static_cast<unsigned>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F')
            digit = static_cast<unsigned>(c - 'A' + 10);
        else
            return std::nullopt;
        r = r << 4;
        r.limbs_[0] |= digit;
    }
    return r;
}

std::array<std::uint8_t, 32> Uint256::to_big_endian() const
{
    std::array<std::uint8_t, 32> out{};
    for (std::size_t i = 0; i < 32; ++i) {
        const std::size_t bit_pos = (31 - i) * 8;
        out[i] = static_cast<std::uint8_t>(limbs_[bit_pos / 64] >> (bit_pos % 64));
    }
    return out;
}

std::string Uint256::to_hex(unsigned bits) const
{
    static constexpr char kDigits[] = "0123456789abcdef";
    const unsigned digits = (bits + 3) / 4;
    std::string out(digits, '0');
    for (unsigned i = 0; i < digits && i < 64; ++i) {
        const unsigned shift = i * 4;
        const unsigned nibble = static_cast<unsigned>(limbs_[shift / 64] >> (shift % 64)) & 0xF;
        out[digits - 1 - i] = kDigits[nibble];
    }
    return out;
}

unsigned Uint256::bit_length() const
{
    for (int i = 3; i >= 0; --i) {
        if (limbs_[i] != 0)
            return static_cast<unsigned>(i) * 64 + static_cast<unsigned>(std::bit_width(limbs_[i]));
    }
    return 0;
}

double Uint256::to_double() const
{
    double r = 0.0;
    for (int i = 3; i >= 0; --i)
        r = r * 18446744073709551616.0 + static_cast<double>(limbs_[i]);
    return r;
}

Uint256 Uint256::operator<<(unsigned shift) const
{
    Uint256 r;
    if (shift >= kBits)
        return r;
    const unsigned limb_shift = shift / 64;
    const unsigned bit_shift = shift % 64;
    for (int i = 3; i >= static_cast<int>(limb_shift); --i) {
        const auto src = static_cast<std::size_t>(i) - limb_shift;
        std::uint64_t v = limbs_[src] << bit_shift;
        if (bit_shift != 0 && src > 0)
            v |= limbs_[src - 1] >> (64 - bit_shift);
        r.limbs_[static_cast<std::size_t>(i)] = v;
    }
    return r;
}

Uint256 Uint256::operator>>(unsigned shift) const
{
    Uint256 r;
    if (shift >= kBits)
        return r;
    const unsigned limb_shift = shift / 64;
    const unsigned bit_shift = shift % 64;
    for (std::size_t i = 0; i + limb_shift < 4; ++i) {
        const std::size_t src = i + limb_shift;
        std::uint64_t v = limbs_[src] >> bit_shift;
        if (bit_shift != 0 && src + 1 < 4)
            v |= limbs_[src + 1] << (64 - bit_shift);
        r.limbs_[i] = v;
    }
    return r;
}

Uint256 Uint256::operator+(const Uint256& rhs) const
{
    Uint256 r;
    unsigned __int128 carry = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const unsigned __int128 sum = static_cast<unsigned __int128>(limbs_[i]) + rhs.limbs_[i] + carry;
        r.limbs_[i] = static_cast<std::uint64_t>(sum);
        carry = sum >> 64;
    }
    return r;
}

Uint256 Uint256::operator-(const Uint256& rhs) const
{
    Uint256 r;
    std::uint64_t borrow = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::uint64_t a = limbs_[i];
        const std::uint64_t b = rhs.limbs_[i];
        r.limbs_[i] = a - b - borrow;
        borrow = (a < b || (a == b && borrow)) ? 1 : 0;
    }
    return r;
}

std::strong_ordering operator<=>(const Uint256& a, const Uint256& b)
{
    for (int i = 3; i >= 0; --i) {
        if (auto c = a.limbs_[i] <=> b.limbs_[i]; c != 0)
            return c;
    }
    return std::strong_ordering::equal;
}

} // namespace rpoa
