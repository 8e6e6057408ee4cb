#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace streetfuel {

/// Day of week for an epoch instant, 0 = Sunday ... 6 = Saturday (UTC).
int weekday_utc(std::int64_t epoch_s);

/// Hour of day 0..23 (UTC).
int hour_utc(std::int64_t epoch_s);

/// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int year, unsigned month, unsigned day);

/// Strict "YYYY-MM-DDTHH:MM:SS[Z]" parser, interpreted as UTC.
/// Throws std::invalid_argument on malformed input.
std::int64_t parse_iso8601(std::string_view text);

/// Strict "YYYY-MM-DD" parser; returns epoch seconds of midnight UTC.
std::int64_t parse_iso_date(std::string_view text);

std::string format_iso8601(std::int64_t epoch_s);

inline constexpr std::int64_t kSecondsPerDay = 86'400;

}  // namespace streetfuel
