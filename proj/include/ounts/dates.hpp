#pragma once

#include <string>

namespace ounts {

// Days since 1970-01-01 for a proleptic Gregorian date.
int days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(int days, int& year, unsigned& month, unsigned& day);

// Parses YYYY-MM-DD; throws ConfigError on malformed or impossible dates.
int parse_iso_date(const std::string& text);
std::string format_iso_date(int days);

// 0 = Monday ... 6 = Sunday
int weekday(int days);

constexpr double kDaysPerYear = 365.0;

}  // namespace ounts
