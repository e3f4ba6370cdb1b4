#include "ounts/dates.hpp"

#include <cstdio>

#include "ounts/errors.hpp"

namespace ounts {

// Howard Hinnant's civil-calendar algorithms.
int days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(int z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

int parse_iso_date(const std::string& text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3 ||
        text[4] != '-' || text[7] != '-') {
        throw ConfigError("malformed ISO-8601 date '" + text + "'");
    }
    const int days = days_from_civil(y, m, d);
    int y2;
    unsigned m2, d2;
    civil_from_days(days, y2, m2, d2);
    if (y2 != y || m2 != m || d2 != d) throw ConfigError("invalid calendar date '" + text + "'");
    return days;
}

std::string format_iso_date(int days) {
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
    return buf;
}

int weekday(int days) {
    // 1970-01-01 was a Thursday (index 3).
    return ((days % 7) + 7 + 3) % 7;
}

}  // namespace ounts
