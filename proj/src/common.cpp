#include "fxvol/common.hpp"

#include <cstdio>

namespace fxvol {

// Days-from-civil / civil-from-days in the style of Howard Hinnant's
// public-domain calendar algorithms.
std::int64_t Date::serial() const {
    std::int64_t yy = y - (m <= 2);
    const std::int64_t era = (yy >= 0 ? yy : yy - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(yy - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::from_serial(std::int64_t days) {
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned dd = doy - (153 * mp + 2) / 5 + 1;
    const unsigned mm = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(yy + (mm <= 2)), static_cast<int>(mm),
                static_cast<int>(dd)};
}

Date Date::parse(const std::string& iso) {
    int yy = 0, mm = 0, dd = 0;
    if (std::sscanf(iso.c_str(), "%d-%d-%d", &yy, &mm, &dd) != 3 || mm < 1 ||
        mm > 12 || dd < 1 || dd > 31) {
        throw DataError("invalid ISO date: '" + iso + "'");
    }
    return Date{yy, mm, dd};
}

int Date::weekday() const {
    // 1970-01-01 is a Thursday (weekday 4).
    std::int64_t s = serial();
    return static_cast<int>(((s % 7) + 7 + 4) % 7);
}

bool Date::is_weekend() const {
    const int w = weekday();
    return w == 0 || w == 6;
}

Date Date::next_day() const { return from_serial(serial() + 1); }

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

}  // namespace fxvol
