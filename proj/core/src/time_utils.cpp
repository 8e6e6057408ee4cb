#include "streetfuel/time_utils.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace streetfuel {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

int parse_fixed_uint(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw std::invalid_argument("truncated timestamp");
  int value = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const char c = text[pos + i];
    if (c < '0' || c > '9') throw std::invalid_argument("non-digit in timestamp");
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw std::invalid_argument("malformed timestamp '" + std::string(text) + "'");
  }
}

}  // namespace

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  // Howard Hinnant's civil-from-days inverse.
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

int weekday_utc(std::int64_t epoch_s) {
  const std::int64_t days = floor_div(epoch_s, kSecondsPerDay);
  // 1970-01-01 was a Thursday.
  return static_cast<int>(((days % 7) + 7 + 4) % 7);
}

int hour_utc(std::int64_t epoch_s) {
  std::int64_t sod = epoch_s - floor_div(epoch_s, kSecondsPerDay) * kSecondsPerDay;
  return static_cast<int>(sod / 3600);
}

std::int64_t parse_iso8601(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SS with optional trailing Z.
  if (text.size() != 19 && !(text.size() == 20 && text.back() == 'Z')) {
    throw std::invalid_argument("malformed timestamp '" + std::string(text) + "'");
  }
  const int year = parse_fixed_uint(text, 0, 4);
  expect_char(text, 4, '-');
  const int month = parse_fixed_uint(text, 5, 2);
  expect_char(text, 7, '-');
  const int day = parse_fixed_uint(text, 8, 2);
  expect_char(text, 10, 'T');
  const int hh = parse_fixed_uint(text, 11, 2);
  expect_char(text, 13, ':');
  const int mm = parse_fixed_uint(text, 14, 2);
  expect_char(text, 16, ':');
  const int ss = parse_fixed_uint(text, 17, 2);
  if (month < 1 || month > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 ||
      ss > 60) {
    throw std::invalid_argument("out-of-range timestamp '" + std::string(text) + "'");
  }
  return days_from_civil(year, month, day) * kSecondsPerDay + hh * 3600 +
         mm * 60 + ss;
}

std::int64_t parse_iso_date(std::string_view text) {
  if (text.size() != 10) {
    throw std::invalid_argument("malformed date '" + std::string(text) + "'");
  }
  const int year = parse_fixed_uint(text, 0, 4);
  expect_char(text, 4, '-');
  const int month = parse_fixed_uint(text, 5, 2);
  expect_char(text, 7, '-');
  const int day = parse_fixed_uint(text, 8, 2);
  if (month < 1 || month > 12 || day < 1 || day > 31) {
    throw std::invalid_argument("out-of-range date '" + std::string(text) + "'");
  }
  return days_from_civil(year, month, day) * kSecondsPerDay;
}

std::string format_iso8601(std::int64_t epoch_s) {
  std::int64_t days = floor_div(epoch_s, kSecondsPerDay);
  std::int64_t sod = epoch_s - days * kSecondsPerDay;

  // civil_from_days (Hinnant).
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  const std::int64_t year = y + (m <= 2);

  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(year), m, d,
                static_cast<long long>(sod / 3600),
                static_cast<long long>((sod % 3600) / 60),
                static_cast<long long>(sod % 60));
  return std::string(buf);
}

}  // namespace streetfuel
