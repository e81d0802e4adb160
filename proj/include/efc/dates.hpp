#pragma once

#include <compare>
#include <string>

namespace efc {

/// Plain calendar date. No timezone handling; market data is date-stamped.
struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31

    auto operator<=>(const Date&) const = default;
};

/// Months are keyed as year*12 + (month-1) so adjacency is plain integer
/// arithmetic.
using MonthKey = int;

MonthKey month_key(const Date& d);
MonthKey month_key(int year, int month);
int year_of(MonthKey key);
int month_of(MonthKey key);

bool is_leap_year(int year);
int days_in_month(int year, int month);
Date month_end(MonthKey key);

Date parse_date(const std::string& text);       // "YYYY-MM-DD"
MonthKey parse_month(const std::string& text);  // "YYYY-MM"
MonthKey parse_yyyymm(const std::string& text); // "YYYYMM"

std::string to_string(const Date& d);
std::string month_to_string(MonthKey key);

}  // namespace efc
