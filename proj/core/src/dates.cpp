#include "folio/dates.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "folio/errors.hpp"

namespace folio {

namespace {

constexpr std::array<int, 12> kDaysInMonth = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

bool is_leap(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
    if (m == 2 && is_leap(y)) return 29;
    return kDaysInMonth[static_cast<std::size_t>(m - 1)];
}

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

} // namespace

bool Date::is_valid(int year, int month, int day) {
    if (month < 1 || month > 12) return false;
    if (day < 1 || day > days_in_month(year, month)) return false;
    return true;
}

Date Date::parse(const std::string& iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw_error(ErrorKind::Parse, "invalid date '" + iso + "' (expected YYYY-MM-DD)");
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (iso[i] < '0' || iso[i] > '9')
            throw_error(ErrorKind::Parse, "invalid date '" + iso + "' (expected YYYY-MM-DD)");
    const int y = std::stoi(iso.substr(0, 4));
    const int m = std::stoi(iso.substr(5, 2));
    const int d = std::stoi(iso.substr(8, 2));
    if (!is_valid(y, m, d))
        throw_error(ErrorKind::Parse, "invalid calendar date '" + iso + "'");
    return Date{y, m, d};
}

Date Date::from_serial(std::int64_t days) {
    return civil_from_days(days);
}

std::int64_t Date::serial() const {
    return days_from_civil(year, month, day);
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::add_years(int n) const {
    Date out{year + n, month, day};
    out.day = std::min(out.day, days_in_month(out.year, out.month));
    return out;
}

int Date::weekday() const {
    return static_cast<int>(((serial() % 7) + 11) % 7);
}

std::vector<Date> weekday_range(Date start, std::size_t count) {
    std::vector<Date> out;
    out.reserve(count);
    std::int64_t s = start.serial();
    while (out.size() < count) {
        Date d = Date::from_serial(s);
        if (!d.is_weekend()) out.push_back(d);
        ++s;
    }
    return out;
}

std::size_t lower_bound_index(const std::vector<Date>& dates, Date d) {
    return static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), d) - dates.begin());
}

std::size_t index_of(const std::vector<Date>& dates, Date d) {
    std::size_t i = lower_bound_index(dates, d);
    if (i == dates.size() || dates[i] != d)
        throw_error(ErrorKind::Data, "date " + d.to_string() + " not present in series");
    return i;
}

} // namespace folio
