#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace skytrack {

struct CalendarDate {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const CalendarDate&) const = default;

  /// "YYYY-MM-DD"
  std::string str() const;
  static std::optional<CalendarDate> parse(std::string_view iso);
  static CalendarDate from_unix(std::int64_t t);
};

/// One UTC hour of raw data; the unit of work for organization.
struct HourStamp {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;

  auto operator<=>(const HourStamp&) const = default;

  CalendarDate date() const { return {year, month, day}; }
  std::int64_t start_unix() const;

  /// "YYYY-MM-DD_HH"
  std::string label() const;
  static std::optional<HourStamp> parse_label(std::string_view label);
  static HourStamp from_unix(std::int64_t t);
};

/// Finds a "YYYY-MM-DD-HH" or "YYYY-MM-DD_HH" stamp anywhere in a file name,
/// e.g. "states_2020-06-22-05.csv.gz".
std::optional<HourStamp> hour_stamp_from_name(std::string_view name);

}  // namespace skytrack
