#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rpoa {

/// Canonical byte writer: little-endian integers, IEEE-754 doubles as their
/// 64-bit pattern, variable-length fields prefixed with a u32 length.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i)
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i)
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void fixed(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

    void str(std::string_view s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    void blob(std::span<const std::uint8_t> bytes)
    {
        u32(static_cast<std::uint32_t>(bytes.size()));
        fixed(bytes);
    }

    [[nodiscard]] const std::vector<std::uint8_t>& bytes() const { return buf_; }
    std::vector<std::uint8_t> release() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

} // namespace rpoa
