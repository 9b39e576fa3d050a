#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace spillnet {

// Calendar day, ISO-8601 text form YYYY-MM-DD.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    std::string to_string() const;

    // Throws DataError on anything that is not a valid YYYY-MM-DD day.
    static Date parse(std::string_view text);

    Date next_day() const;
    // Next Monday..Friday day strictly after this one.
    Date next_weekday() const;
};

bool is_leap_year(int year);
int days_in_month(int year, int month);
// 0 = Monday ... 6 = Sunday.
int day_of_week(const Date& d);

} // namespace spillnet
