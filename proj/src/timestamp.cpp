#include "greensentry/timestamp.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>

#include "greensentry/error.hpp"

namespace greensentry {
namespace {

using namespace std::chrono;

constexpr std::array<std::string_view, 7> kWeekdays = {"Sun", "Mon", "Tue", "Wed",
                                                       "Thu", "Fri", "Sat"};
constexpr std::array<std::string_view, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view digits, const char* field, int lo, int hi) {
  if (digits.empty()) throw ParseError(field, "missing value");
  for (char c : digits) {
    if (c < '0' || c > '9') throw ParseError(field, "expected digits, got '" + std::string(digits) + "'");
  }
  int value = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (value < lo || value > hi) {
    throw ParseError(field, "value " + std::to_string(value) + " out of range");
  }
  return value;
}

Timestamp build(int year, int month, int day, int hour, int minute) {
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) throw ParseError("day", "invalid calendar date");
  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return {static_cast<std::int64_t>(days_since_epoch) * kMinutesPerDay + hour * 60 + minute};
}

// hh:mm:ss or hh:mm
void parse_clock(std::string_view s, bool seconds_required, int& hour, int& minute) {
  if (s.size() < 5 || s[2] != ':') throw ParseError("time", "expected hh:mm[:ss], got '" + std::string(s) + "'");
  hour = parse_int(s.substr(0, 2), "hour", 0, 23);
  minute = parse_int(s.substr(3, 2), "minute", 0, 59);
  if (s.size() == 5) {
    if (seconds_required) throw ParseError("second", "missing seconds");
    return;
  }
  if (s.size() < 8 || s[5] != ':') throw ParseError("second", "expected :ss");
  parse_int(s.substr(6, 2), "second", 0, 60);
  if (s.size() > 8) {
    // fractional seconds are tolerated and discarded
    if (s[8] != '.') throw ParseError("second", "unexpected trailing text '" + std::string(s.substr(8)) + "'");
    parse_int(s.substr(9), "second", 0, 999999999);
  }
}

Timestamp parse_iso(std::string_view s) {
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.remove_suffix(1);
  if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ')) {
    throw ParseError("date", "expected YYYY-MM-DDThh:mm");
  }
  const int year = parse_int(s.substr(0, 4), "year", 1, 9999);
  const int month = parse_int(s.substr(5, 2), "month", 1, 12);
  const int day = parse_int(s.substr(8, 2), "day", 1, 31);
  int hour = 0, minute = 0;
  parse_clock(s.substr(11), false, hour, minute);
  return build(year, month, day, hour, minute);
}

template <std::size_t N>
int lookup(const std::array<std::string_view, N>& names, std::string_view token, const char* field) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == token) return static_cast<int>(i);
  }
  throw ParseError(field, "unknown name '" + std::string(token) + "'");
}

Timestamp parse_asctime(std::string_view s) {
  // tokens separated by one or more spaces; asctime pads single-digit days
  std::array<std::string_view, 5> tok{};
  std::size_t n = 0;
  while (!s.empty()) {
    const auto space = s.find(' ');
    const auto part = s.substr(0, space);
    if (!part.empty()) {
      if (n == tok.size()) throw ParseError("year", "unexpected trailing text");
      tok[n++] = part;
    }
    if (space == std::string_view::npos) break;
    s.remove_prefix(space + 1);
  }
  if (n != 5) throw ParseError("format", "expected 'Www Mmm dd hh:mm:ss yyyy'");
  const int wday = lookup(kWeekdays, tok[0], "weekday");
  const int month = lookup(kMonths, tok[1], "month") + 1;
  const int day = parse_int(tok[2], "day", 1, 31);
  int hour = 0, minute = 0;
  parse_clock(tok[3], true, hour, minute);
  const int year = parse_int(tok[4], "year", 1, 9999);
  const Timestamp t = build(year, month, day, hour, minute);
  const std::chrono::weekday actual{sys_days{year_month_day{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                               std::chrono::day{static_cast<unsigned>(day)}}}};
  if (static_cast<int>(actual.c_encoding()) != wday) {
    throw ParseError("weekday", std::string(tok[0]) + " does not match the date");
  }
  return t;
}

}  // namespace

int Timestamp::minute_of_day() const {
  const auto m = epoch_minute % kMinutesPerDay;
  return static_cast<int>(m < 0 ? m + kMinutesPerDay : m);
}

Timestamp Timestamp::from_civil(int year, unsigned month, unsigned day, int hour, int minute) {
  return build(year, static_cast<int>(month), static_cast<int>(day), hour, minute);
}

Timestamp parse_timestamp(std::string_view text) {
  const auto s = trim(text);
  if (s.empty()) throw ParseError("format", "empty timestamp");
  if (s[0] >= '0' && s[0] <= '9') return parse_iso(s);
  return parse_asctime(s);
}

namespace {
struct Civil {
  int year;
  unsigned month, day;
  int hour, minute;
  unsigned weekday;
};

Civil to_civil(Timestamp t) {
  std::int64_t days = t.epoch_minute / kMinutesPerDay;
  std::int64_t rem = t.epoch_minute % kMinutesPerDay;
  if (rem < 0) {
    rem += kMinutesPerDay;
    --days;
  }
  const sys_days sd{std::chrono::days{days}};
  const year_month_day ymd{sd};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 60), static_cast<int>(rem % 60),
          weekday{sd}.c_encoding()};
}
}  // namespace

std::string format_iso(Timestamp t) {
  const Civil c = to_civil(t);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:00Z", c.year, c.month, c.day, c.hour, c.minute);
  return buf;
}

std::string format_asctime(Timestamp t) {
  const Civil c = to_civil(t);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s %s %2u %02d:%02d:00 %04d", kWeekdays[c.weekday].data(),
                kMonths[c.month - 1].data(), c.day, c.hour, c.minute, c.year);
  return buf;
}

}  // namespace greensentry
