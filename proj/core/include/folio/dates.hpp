#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace folio {

/// Calendar date. Ordering is chronological; arithmetic goes through the
/// serial day number (days since 1970-01-01, proleptic Gregorian).
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    static Date parse(const std::string& iso);   // strict YYYY-MM-DD
    static Date from_serial(std::int64_t days);
    static bool is_valid(int year, int month, int day);

    std::int64_t serial() const;
    std::string to_string() const;
    Date add_years(int n) const;                 // day clamped to month length
    Date add_days(std::int64_t n) const { return from_serial(serial() + n); }
    int weekday() const;                         // 0 = Sunday .. 6 = Saturday
    bool is_weekend() const { int w = weekday(); return w == 0 || w == 6; }
};

/// Consecutive weekday sequence used as a synthetic trading calendar.
std::vector<Date> weekday_range(Date start, std::size_t count);

/// Index of the first date >= d, or dates.size() if none.
std::size_t lower_bound_index(const std::vector<Date>& dates, Date d);

/// Index of d in dates, throws Data error if absent.
std::size_t index_of(const std::vector<Date>& dates, Date d);

} // namespace folio
