#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace audvault {

/// Signed time span with nanosecond resolution.
struct Duration {
    std::int64_t ns = 0;

    static constexpr Duration from_ns(std::int64_t v) { return Duration{v}; }
    static constexpr Duration from_seconds(std::int64_t s) { return Duration{s * 1'000'000'000}; }
    static constexpr Duration from_ms(std::int64_t ms) { return Duration{ms * 1'000'000}; }

    double seconds() const { return static_cast<double>(ns) / 1e9; }

    friend constexpr auto operator<=>(Duration, Duration) = default;
    friend constexpr Duration operator+(Duration a, Duration b) { return {a.ns + b.ns}; }
    friend constexpr Duration operator-(Duration a, Duration b) { return {a.ns - b.ns}; }
};

/// Accepts plain decimal seconds ("0", "3.25") and the day-clock form
/// ("0 days 00:00:01.0", "1 day 02:00:00", "00:00:03.3"). Throws
/// ErrorCode::InvalidArgument on anything else.
Duration parse_duration(std::string_view text);

/// "D days HH:MM:SS[.fffffffff]" with trailing fractional zeros trimmed.
std::string format_duration(Duration d);

/// Calendar date with optional time of day, nanoseconds since 1970-01-01 UTC.
struct Date {
    std::int64_t ns = 0;
    friend constexpr auto operator<=>(Date, Date) = default;
};

/// "YYYY-MM-DD", optionally followed by ' ' or 'T' and "HH:MM:SS[.f]".
Date parse_date(std::string_view text);

/// Emits "YYYY-MM-DD" when the time of day is zero, else "YYYY-MM-DD HH:MM:SS[.f]".
std::string format_date(Date d);

}  // namespace audvault
