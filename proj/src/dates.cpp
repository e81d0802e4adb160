#include "efc/dates.hpp"

#include <cctype>
#include <cstdio>

#include "efc/errors.hpp"

namespace efc {

namespace {

bool all_digits(const std::string& s, size_t begin, size_t end) {
    if (begin >= end || end > s.size()) return false;
    for (size_t i = begin; i < end; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

int to_int(const std::string& s, size_t begin, size_t end) {
    int v = 0;
    for (size_t i = begin; i < end; ++i) v = v * 10 + (s[i] - '0');
    return v;
}

}  // namespace

MonthKey month_key(const Date& d) { return month_key(d.year, d.month); }

MonthKey month_key(int year, int month) { return year * 12 + (month - 1); }

int year_of(MonthKey key) { return key / 12; }

int month_of(MonthKey key) { return key % 12 + 1; }

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return kDays[month - 1];
}

Date month_end(MonthKey key) {
    const int y = year_of(key);
    const int m = month_of(key);
    return Date{y, m, days_in_month(y, m)};
}

Date parse_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !all_digits(text, 0, 4) || !all_digits(text, 5, 7) || !all_digits(text, 8, 10)) {
        throw DataError("malformed date '" + text + "' (expected YYYY-MM-DD)");
    }
    Date d{to_int(text, 0, 4), to_int(text, 5, 7), to_int(text, 8, 10)};
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
        throw DataError("invalid calendar date '" + text + "'");
    }
    return d;
}

MonthKey parse_month(const std::string& text) {
    if (text.size() != 7 || text[4] != '-' || !all_digits(text, 0, 4) || !all_digits(text, 5, 7)) {
        throw DataError("malformed month '" + text + "' (expected YYYY-MM)");
    }
    const int m = to_int(text, 5, 7);
    if (m < 1 || m > 12) throw DataError("invalid month '" + text + "'");
    return month_key(to_int(text, 0, 4), m);
}

MonthKey parse_yyyymm(const std::string& text) {
    if (text.size() != 6 || !all_digits(text, 0, 6)) {
        throw DataError("malformed factor date '" + text + "' (expected YYYYMM)");
    }
    const int m = to_int(text, 4, 6);
    if (m < 1 || m > 12) throw DataError("invalid factor month '" + text + "'");
    return month_key(to_int(text, 0, 4), m);
}

std::string to_string(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::string month_to_string(MonthKey key) {
    char buf[12];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year_of(key), month_of(key));
    return buf;
}

}  // namespace efc
