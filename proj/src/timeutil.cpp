#include "skytrack/timeutil.hpp"

#include <chrono>
#include <cstdio>

#include "skytrack/textio.hpp"

namespace skytrack {

namespace {

namespace chr = std::chrono;

bool valid_ymd(int y, int m, int d) {
  return chr::year_month_day{chr::year{y}, chr::month{static_cast<unsigned>(m)}, chr::day{static_cast<unsigned>(d)}}.ok();
}

std::optional<int> digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace

std::string CalendarDate::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::optional<CalendarDate> CalendarDate::parse(std::string_view iso) {
  iso = text::trim(iso);
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  auto y = digits(iso, 0, 4), m = digits(iso, 5, 2), d = digits(iso, 8, 2);
  if (!y || !m || !d || !valid_ymd(*y, *m, *d)) return std::nullopt;
  return CalendarDate{*y, *m, *d};
}

CalendarDate CalendarDate::from_unix(std::int64_t t) {
  auto days = chr::floor<chr::days>(chr::sys_seconds{chr::seconds{t}});
  chr::year_month_day ymd{days};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
          static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

std::int64_t HourStamp::start_unix() const {
  chr::sys_days d{chr::year{year} / chr::month{static_cast<unsigned>(month)} / chr::day{static_cast<unsigned>(day)}};
  return d.time_since_epoch().count() * 86400LL + hour * 3600LL;
}

std::string HourStamp::label() const {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d_%02d", year, month, day, hour);
  return buf;
}

std::optional<HourStamp> HourStamp::parse_label(std::string_view label) {
  if (label.size() != 13 || (label[10] != '_' && label[10] != '-')) return std::nullopt;
  auto date = CalendarDate::parse(label.substr(0, 10));
  auto h = digits(label, 11, 2);
  if (!date || !h || *h > 23) return std::nullopt;
  return HourStamp{date->year, date->month, date->day, *h};
}

HourStamp HourStamp::from_unix(std::int64_t t) {
  auto d = CalendarDate::from_unix(t);
  std::int64_t secs = t - chr::sys_days{chr::year{d.year} / chr::month{static_cast<unsigned>(d.month)} /
                                        chr::day{static_cast<unsigned>(d.day)}}
                              .time_since_epoch()
                              .count() *
                              86400LL;
  return {d.year, d.month, d.day, static_cast<int>(secs / 3600)};
}

std::optional<HourStamp> hour_stamp_from_name(std::string_view name) {
  for (std::size_t i = 0; i + 13 <= name.size(); ++i) {
    if (auto h = HourStamp::parse_label(name.substr(i, 13))) {
      // reject matches that are a prefix of a longer digit run
      if (i + 13 < name.size() && name[i + 13] >= '0' && name[i + 13] <= '9') continue;
      return h;
    }
  }
  return std::nullopt;
}

}  // namespace skytrack
