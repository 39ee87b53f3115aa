#include "culture/timeutil.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace culture {

namespace {

using namespace std::chrono;

int parse_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  int v = 0;
  if (pos + len > text.size()) throw Error("malformed timestamp '" + std::string(whole) + "'");
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
  if (ec != std::errc() || ptr != text.data() + pos + len) {
    throw Error("malformed timestamp '" + std::string(whole) + "'");
  }
  return v;
}

void expect(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error("malformed timestamp '" + std::string(text) + "'");
  }
}

}  // namespace

Timestamp parse_iso8601(std::string_view text) {
  const int y = parse_int(text, 0, 4, text);
  expect(text, 4, '-');
  const int mo = parse_int(text, 5, 2, text);
  expect(text, 7, '-');
  const int d = parse_int(text, 8, 2, text);
  int h = 0, mi = 0, s = 0;
  if (text.size() > 10) {
    expect(text, 10, 'T');
    h = parse_int(text, 11, 2, text);
    expect(text, 13, ':');
    mi = parse_int(text, 14, 2, text);
    expect(text, 16, ':');
    s = parse_int(text, 17, 2, text);
    if (text.size() != 20 || text[19] != 'Z') {
      throw Error("malformed timestamp '" + std::string(text) + "' (expected trailing Z)");
    }
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw Error("invalid date in timestamp '" + std::string(text) + "'");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days) * kSecondsPerDay + h * kSecondsPerHour + mi * 60 + s;
}

std::string format_iso8601(Timestamp ts) {
  const Timestamp day_start = floor_to_day(ts);
  const year_month_day ymd{sys_days{days{day_start / kSecondsPerDay}}};
  const Timestamp sod = ts - day_start;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                static_cast<int>(sod % 60));
  return buf;
}

std::string format_date(Timestamp ts) { return format_iso8601(ts).substr(0, 10); }

Timestamp floor_to_hour(Timestamp ts) {
  Timestamp r = ts % kSecondsPerHour;
  if (r < 0) r += kSecondsPerHour;
  return ts - r;
}

Timestamp floor_to_day(Timestamp ts) {
  Timestamp r = ts % kSecondsPerDay;
  if (r < 0) r += kSecondsPerDay;
  return ts - r;
}

Timestamp floor_to_month(Timestamp ts) {
  const year_month_day ymd{sys_days{days{floor_to_day(ts) / kSecondsPerDay}}};
  const sys_days first{ymd.year() / ymd.month() / day{1}};
  return static_cast<Timestamp>(first.time_since_epoch().count()) * kSecondsPerDay;
}

Timestamp add_months(Timestamp month_start, int n) {
  const year_month_day ymd{sys_days{days{floor_to_day(month_start) / kSecondsPerDay}}};
  const year_month ym = ymd.year() / ymd.month() + months{n};
  const sys_days first{ym / day{1}};
  return static_cast<Timestamp>(first.time_since_epoch().count()) * kSecondsPerDay;
}

int local_hour(Timestamp ts, Timestamp utc_offset_seconds) {
  Timestamp local = (ts + utc_offset_seconds) % kSecondsPerDay;
  if (local < 0) local += kSecondsPerDay;
  return static_cast<int>(local / kSecondsPerHour);
}

}  // namespace culture
