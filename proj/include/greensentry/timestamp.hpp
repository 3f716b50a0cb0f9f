#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace greensentry {

/// Whole minutes since 1970-01-01T00:00Z. Seconds are never stored.
struct Timestamp {
  std::int64_t epoch_minute = 0;

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;

  constexpr Timestamp plus_minutes(std::int64_t m) const { return {epoch_minute + m}; }
  /// Minute of the UTC day, 0..1439.
  int minute_of_day() const;

  static Timestamp from_civil(int year, unsigned month, unsigned day, int hour = 0,
                              int minute = 0);
};

constexpr std::int64_t kMinutesPerDay = 1440;

/// Accepts `Www Mmm dd hh:mm:ss yyyy` (asctime) or ISO-8601
/// `YYYY-MM-DDThh:mm[:ss][Z]`. Seconds are validated then truncated.
/// Throws ParseError naming the offending field.
Timestamp parse_timestamp(std::string_view text);

/// `YYYY-MM-DDThh:mm:00Z`
std::string format_iso(Timestamp t);
/// `Www Mmm dd hh:mm:00 yyyy`, day space-padded like time.asctime().
std::string format_asctime(Timestamp t);

}  // namespace greensentry
