#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace urbansense {

// Uplink payload layout, little-endian multi-byte fields:
//   [0]      version (currently 1)
//   [1..8]   dev_eui
//   [9..12]  frame counter
//   [13..14] temperature, signed hundredths of degC
//   [15..16] lux
//   [17]     flags (bit 0: lux gross error)
constexpr std::size_t kFrameLen = 18;
constexpr std::uint8_t kFrameVersion = 1;
constexpr std::uint8_t kFlagLuxGrossError = 0x01;

struct UplinkFrame {
    std::uint8_t version = kFrameVersion;
    std::uint64_t dev_eui = 0;
    std::uint32_t counter = 0;
    std::int16_t temp_centi = 0;
    std::uint16_t lux = 0;
    std::uint8_t flags = 0;

    bool operator==(const UplinkFrame&) const = default;
};

using FrameBytes = std::array<std::uint8_t, kFrameLen>;

inline FrameBytes encode_frame(const UplinkFrame& f) {
    FrameBytes b{};
    b[0] = f.version;
    for (int i = 0; i < 8; ++i) b[1 + i] = static_cast<std::uint8_t>(f.dev_eui >> (8 * i));
    for (int i = 0; i < 4; ++i) b[9 + i] = static_cast<std::uint8_t>(f.counter >> (8 * i));
    auto t = static_cast<std::uint16_t>(f.temp_centi);
    b[13] = static_cast<std::uint8_t>(t);
    b[14] = static_cast<std::uint8_t>(t >> 8);
    b[15] = static_cast<std::uint8_t>(f.lux);
    b[16] = static_cast<std::uint8_t>(f.lux >> 8);
    b[17] = f.flags;
    return b;
}

inline std::optional<UplinkFrame> decode_frame(std::span<const std::uint8_t> b) {
    if (b.size() != kFrameLen) return std::nullopt;
    if (b[0] != kFrameVersion) return std::nullopt;
    UplinkFrame f;
    f.version = b[0];
    for (int i = 0; i < 8; ++i) f.dev_eui |= static_cast<std::uint64_t>(b[1 + i]) << (8 * i);
    for (int i = 0; i < 4; ++i) f.counter |= static_cast<std::uint32_t>(b[9 + i]) << (8 * i);
    f.temp_centi = static_cast<std::int16_t>(
        static_cast<std::uint16_t>(b[13] | (static_cast<std::uint16_t>(b[14]) << 8)));
    f.lux = static_cast<std::uint16_t>(b[15] | (static_cast<std::uint16_t>(b[16]) << 8));
    f.flags = b[17];
    return f;
}

inline std::string to_hex(std::span<const std::uint8_t> b) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (auto c : b) {
        s += digits[c >> 4];
        s += digits[c & 0xf];
    }
    return s;
}

inline std::optional<std::vector<std::uint8_t>> from_hex(std::string_view s) {
    if (s.size() % 2 != 0) return std::nullopt;
    std::vector<std::uint8_t> out;
    out.reserve(s.size() / 2);
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    for (std::size_t i = 0; i < s.size(); i += 2) {
        int hi = nib(s[i]), lo = nib(s[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

}  // namespace urbansense
