#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <tuple>

#include "xmodel/errors.hpp"

namespace xmodel {

/**
 * @brief A calendar day with civil-day arithmetic.
 *
 * Stores an ISO date and converts to/from a serial day number so that day
 * offsets and weekday lookups are cheap. No timezone handling; the panel
 * layer deals with the two daylight-saving irregularities explicitly.
 */
struct Date {
    int year = 1970;
    unsigned month = 1;  // 1..12
    unsigned day = 1;    // 1..31

    /// Serial day count relative to 1970-01-01 (Gregorian, proleptic).
    std::int64_t serial() const {
        const int y = year - (month <= 2);
        const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
    }

    static Date from_serial(std::int64_t z) {
        z += 719468;
        const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp + (mp < 10 ? 3 : -9);
        return Date{static_cast<int>(y + (m <= 2)), m, d};
    }

    Date plus_days(std::int64_t n) const { return from_serial(serial() + n); }

    /// ISO 8601 weekday number: 1 = Monday ... 7 = Sunday.
    int weekday() const {
        const std::int64_t z = serial();  // 1970-01-01 was a Thursday
        return static_cast<int>(((z + 3) % 7 + 7) % 7) + 1;
    }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, month, day);
        return buf;
    }

    static Date parse(const std::string& s) {
        int y = 0;
        unsigned m = 0, d = 0;
        char dash1 = 0, dash2 = 0;
        if (std::sscanf(s.c_str(), "%d%c%u%c%u", &y, &dash1, &m, &dash2, &d) != 5 ||
            dash1 != '-' || dash2 != '-' || m < 1 || m > 12 || d < 1 || d > 31) {
            throw ValidationError("invalid ISO date: '" + s + "'");
        }
        return Date{y, m, d};
    }

    friend bool operator==(const Date& a, const Date& b) {
        return std::tie(a.year, a.month, a.day) == std::tie(b.year, b.month, b.day);
    }
    friend bool operator!=(const Date& a, const Date& b) { return !(a == b); }
    friend bool operator<(const Date& a, const Date& b) { return a.serial() < b.serial(); }
};

/// Weekday function: 1 for Monday up to 7 for Sunday.
inline int weekday_number(const Date& d) { return d.weekday(); }

/// Cumulative weekday indicator: 1 when the weekday number is below k.
inline double weekday_indicator(int weekday, int k) { return weekday < k ? 1.0 : 0.0; }

}  // namespace xmodel
