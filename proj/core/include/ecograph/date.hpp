#pragma once

#include "ecograph/errors.hpp"

#include <compare>
#include <cstdio>
#include <string>

namespace ecograph {

/// Calendar day, proleptic Gregorian. Engine time steps are daily.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;

    static bool is_leap(int y) {
        return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    }

    static int days_in_month(int y, int m) {
        static constexpr int table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        if (m == 2 && is_leap(y)) return 29;
        return table[m - 1];
    }

    bool valid() const {
        return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
    }

    /// Days since 1970-01-01 (negative before).
    long long serial() const {
        // Howard Hinnant's civil-days algorithm.
        long long y = year - (month <= 2 ? 1 : 0);
        long long era = (y >= 0 ? y : y - 399) / 400;
        unsigned yoe = static_cast<unsigned>(y - era * 400);
        unsigned doy = (153u * (static_cast<unsigned>(month) + (month > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(day) - 1u;
        unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
        return era * 146097LL + static_cast<long long>(doe) - 719468LL;
    }

    Date next_day() const {
        Date d = *this;
        if (++d.day > days_in_month(d.year, d.month)) {
            d.day = 1;
            if (++d.month > 12) {
                d.month = 1;
                ++d.year;
            }
        }
        return d;
    }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
        return buf;
    }

    /// Parses strict ISO 8601 YYYY-MM-DD.
    static Date parse(const std::string& s) {
        int y = 0, m = 0, d = 0;
        char tail = 0;
        if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3 || s.size() != 10) {
            throw ParseError("bad date '" + s + "', expected YYYY-MM-DD");
        }
        Date out{y, m, d};
        if (!out.valid()) throw ParseError("invalid calendar date '" + s + "'");
        return out;
    }
};

}  // namespace ecograph
