#include "spillnet/dates.hpp"

#include <cstdio>

#include "spillnet/error.hpp"

namespace spillnet {

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[month - 1];
}

int day_of_week(const Date& d) {
    // Sakamoto's method, shifted so 0 = Monday.
    static const int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
    int y = d.year - (d.month < 3 ? 1 : 0);
    int dow = (y + y / 4 - y / 100 + y / 400 + t[d.month - 1] + d.day) % 7;
    return (dow + 6) % 7;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw DataError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    auto digits = [&](int from, int len) {
        int v = 0;
        for (int i = from; i < from + len; ++i) {
            char c = text[i];
            if (c < '0' || c > '9')
                throw DataError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
            v = v * 10 + (c - '0');
        }
        return v;
    };
    Date d{digits(0, 4), digits(5, 2), digits(8, 2)};
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        throw DataError("invalid date '" + std::string(text) + "'");
    return d;
}

Date Date::next_day() const {
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

Date Date::next_weekday() const {
    Date d = next_day();
    while (day_of_week(d) > 4) d = d.next_day();
    return d;
}

} // namespace spillnet
