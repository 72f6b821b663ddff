#include "audvault/duration.hpp"

#include "audvault/error.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <limits>

namespace audvault {

namespace {

constexpr std::int64_t kNsPerSecond = 1'000'000'000;
constexpr std::int64_t kNsPerDay = 86'400 * kNsPerSecond;

[[noreturn]] void bad_duration(std::string_view text) {
    fail(ErrorCode::InvalidArgument, "unparsable duration: '" + std::string(text) + "'");
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Parses a run of digits starting at pos; returns false if none present.
bool take_uint(std::string_view s, std::size_t& pos, std::int64_t& out) {
    const std::size_t begin = pos;
    while (pos < s.size() && is_digit(s[pos])) {
        ++pos;
    }
    if (pos == begin || pos - begin > 18) {
        return false;
    }
    std::from_chars(s.data() + begin, s.data() + pos, out);
    return true;
}

// Parses an optional ".fffffffff" tail into nanoseconds, rounding beyond 9 digits.
bool take_fraction(std::string_view s, std::size_t& pos, std::int64_t& ns) {
    ns = 0;
    if (pos >= s.size() || s[pos] != '.') {
        return true;
    }
    ++pos;
    const std::size_t begin = pos;
    std::int64_t scale = 100'000'000;
    bool round_up = false;
    while (pos < s.size() && is_digit(s[pos])) {
        const int digit = s[pos] - '0';
        if (scale > 0) {
            ns += digit * scale;
            scale /= 10;
        } else if (pos - begin == 9) {
            round_up = digit >= 5;
        }
        ++pos;
    }
    if (round_up) {
        ++ns;
    }
    // "1." is accepted as 1 s; a bare "." is not.
    return pos > begin || (begin >= 2 && is_digit(s[begin - 2]));
}


// HH:MM:SS[.f] -> ns
bool take_clock(std::string_view s, std::size_t& pos, std::int64_t& out) {
    std::int64_t h = 0, m = 0, sec = 0, frac = 0;
    if (!take_uint(s, pos, h) || pos >= s.size() || s[pos++] != ':') return false;
    if (!take_uint(s, pos, m) || pos >= s.size() || s[pos++] != ':') return false;
    if (!take_uint(s, pos, sec) || !take_fraction(s, pos, frac)) return false;
    if (m >= 60 || sec >= 60) return false;
    out = ((h * 60 + m) * 60 + sec) * kNsPerSecond + frac;
    return true;
}

std::string format_fraction(std::int64_t ns) {
    if (ns == 0) {
        return {};
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, ".%09lld", static_cast<long long>(ns));
    std::string out(buf);
    while (out.back() == '0') {
        out.pop_back();
    }
    return out;
}

std::string format_clock(std::int64_t ns_of_day) {
    const std::int64_t total_s = ns_of_day / kNsPerSecond;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", static_cast<long long>(total_s / 3600),
                  static_cast<long long>((total_s / 60) % 60), static_cast<long long>(total_s % 60));
    return std::string(buf) + format_fraction(ns_of_day % kNsPerSecond);
}

}  // namespace

Duration parse_duration(std::string_view text) {
    std::size_t pos = 0;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
        negative = text[pos] == '-';
        ++pos;
    }
    std::int64_t value = 0;

    if (text.find(':') != std::string_view::npos) {
        std::int64_t days = 0;
        if (text.find("day") != std::string_view::npos) {
            if (!take_uint(text, pos, days)) bad_duration(text);
            while (pos < text.size() && text[pos] == ' ') ++pos;
            if (text.substr(pos, 4) == "days") {
                pos += 4;
            } else if (text.substr(pos, 3) == "day") {
                pos += 3;
            } else {
                bad_duration(text);
            }
            while (pos < text.size() && text[pos] == ' ') ++pos;
        }
        std::int64_t clock = 0;
        if (!take_clock(text, pos, clock)) bad_duration(text);
        value = days * kNsPerDay + clock;
    } else {
        std::int64_t whole = 0, frac = 0;
        const bool has_whole = take_uint(text, pos, whole);
        const std::size_t dot = pos;
        if (!take_fraction(text, pos, frac)) bad_duration(text);
        if (!has_whole && pos <= dot + 1) bad_duration(text);
        if (whole > std::numeric_limits<std::int64_t>::max() / kNsPerSecond) bad_duration(text);
        value = whole * kNsPerSecond + frac;
    }
    if (pos != text.size()) {
        bad_duration(text);
    }
    return Duration{negative ? -value : value};
}

std::string format_duration(Duration d) {
    if (d.ns < 0) {
        return "-" + format_duration(Duration{-d.ns});
    }
    const std::int64_t days = d.ns / kNsPerDay;
    return std::to_string(days) + " days " + format_clock(d.ns % kNsPerDay);
}

Date parse_date(std::string_view text) {
    using namespace std::chrono;
    auto bad = [&]() -> Date {
        fail(ErrorCode::InvalidArgument, "unparsable date: '" + std::string(text) + "'");
    };
    std::size_t pos = 0;
    std::int64_t y = 0, m = 0, d = 0;
    if (!take_uint(text, pos, y) || pos - 0 != 4 || pos >= text.size() || text[pos++] != '-') return bad();
    if (!take_uint(text, pos, m) || pos >= text.size() || text[pos++] != '-') return bad();
    if (!take_uint(text, pos, d)) return bad();
    const year_month_day ymd{year{static_cast<int>(y)}, month{static_cast<unsigned>(m)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return bad();
    std::int64_t clock = 0;
    if (pos < text.size()) {
        if (text[pos] != ' ' && text[pos] != 'T') return bad();
        ++pos;
        if (!take_clock(text, pos, clock) || clock >= kNsPerDay || pos != text.size()) return bad();
    }
    const std::int64_t days_since_epoch = sys_days{ymd}.time_since_epoch().count();
    return Date{days_since_epoch * kNsPerDay + clock};
}

std::string format_date(Date date) {
    using namespace std::chrono;
    std::int64_t days = date.ns / kNsPerDay;
    std::int64_t rem = date.ns % kNsPerDay;
    if (rem < 0) {
        rem += kNsPerDay;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    std::string out(buf);
    if (rem != 0) {
        out += " " + format_clock(rem);
    }
    return out;
}

}  // namespace audvault
