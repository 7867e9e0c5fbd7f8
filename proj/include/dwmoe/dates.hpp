#pragma once

// Minimal proleptic-Gregorian calendar arithmetic: civil date <-> serial
// day conversion and ISO-8601 week handling for the weekly aggregation
// step. Serial day 0 is 1970-01-01 (a Thursday).

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace dwmoe {

struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    friend bool operator==(const Date&, const Date&) = default;
};

// Days-from-civil and civil-from-days, after Howard Hinnant's algorithms.
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);               // [0, 399]
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;                       // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;              // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline Date civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);            // [0, 146096]
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);            // [0, 365]
    const unsigned mp = (5 * doy + 2) / 153;                                 // [0, 11]
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;                         // [1, 31]
    const unsigned m = mp + (mp < 10 ? 3 : -9);                              // [1, 12]
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline std::int64_t to_serial(const Date& d) { return days_from_civil(d.year, d.month, d.day); }

// ISO weekday, Monday = 1 .. Sunday = 7.
inline int iso_weekday(std::int64_t serial) {
    const std::int64_t w = (serial + 3) % 7;
    return static_cast<int>(w < 0 ? w + 7 : w) + 1;
}

// Serial day of the Monday opening the ISO week that contains `serial`.
inline std::int64_t iso_week_monday(std::int64_t serial) {
    return serial - (iso_weekday(serial) - 1);
}

inline bool is_leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline int days_in_month(int y, int m) {
    static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return lengths[m - 1];
}

// Parse a strict ISO-8601 calendar date "YYYY-MM-DD".
inline std::optional<Date> parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto num = [](std::string_view part, int& out) {
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        return ec == std::errc{} && p == part.data() + part.size();
    };
    Date d;
    if (!num(s.substr(0, 4), d.year) || !num(s.substr(5, 2), d.month) || !num(s.substr(8, 2), d.day))
        return std::nullopt;
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        return std::nullopt;
    return d;
}

inline std::string format_date(const Date& d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

}  // namespace dwmoe
