#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace urbansense {

// Civil-time helpers for ISO-8601 UTC timestamps. Hand-rolled so every
// platform formats and parses identically.

constexpr std::int64_t days_from_civil(int y, int m, int d) noexcept {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr void civil_from_days(std::int64_t z, int& y, int& m, int& d) noexcept {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

// "YYYY-MM-DDTHH:MM:SSZ" -> epoch seconds.
inline std::optional<std::int64_t> parse_iso8601(std::string_view s) {
    int y, mo, d, h, mi, sec;
    char z = '\0';
    if (std::sscanf(std::string(s).c_str(), "%d-%d-%dT%d:%d:%d%c",
                    &y, &mo, &d, &h, &mi, &sec, &z) != 7 || z != 'Z')
        return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
        return std::nullopt;
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + sec;
}

inline std::string format_iso8601(std::int64_t epoch_s) {
    std::int64_t days = epoch_s / 86400;
    std::int64_t rem = epoch_s % 86400;
    if (rem < 0) { rem += 86400; --days; }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

inline std::string format_iso8601_ms(std::int64_t epoch_ms) {
    std::string s = format_iso8601(epoch_ms / 1000);
    std::int64_t ms = epoch_ms % 1000;
    if (ms < 0) ms += 1000;
    char buf[8];
    std::snprintf(buf, sizeof(buf), ".%03d", static_cast<int>(ms));
    s.insert(s.size() - 1, buf);
    return s;
}

inline std::optional<std::int64_t> parse_iso8601_ms(std::string_view s) {
    auto dot = s.find('.');
    if (dot == std::string_view::npos) {
        auto sec = parse_iso8601(s);
        if (!sec) return std::nullopt;
        return *sec * 1000;
    }
    std::string head(s.substr(0, dot));
    head += 'Z';
    auto sec = parse_iso8601(head);
    if (!sec) return std::nullopt;
    int ms = 0;
    if (std::sscanf(std::string(s.substr(dot + 1)).c_str(), "%dZ", &ms) != 1)
        return std::nullopt;
    return *sec * 1000 + ms;
}

// "HH:MM" -> minute of day.
inline std::optional<int> parse_hhmm(std::string_view s) {
    int h, m;
    if (std::sscanf(std::string(s).c_str(), "%d:%d", &h, &m) != 2) return std::nullopt;
    if (h < 0 || h > 23 || m < 0 || m > 59) return std::nullopt;
    return h * 60 + m;
}

}  // namespace urbansense
