#include "atlas/timeutil.hpp"

#include <array>
#include <cstdio>

namespace atlas {

namespace {

// Civil calendar conversions (proleptic Gregorian), independent of the C
// library's timezone handling.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  int year;
  int month;
  int day;
};

Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Civil{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
               static_cast<int>(d)};
}

bool days_in_month_ok(int y, int m, int d) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12 || d < 1) return false;
  int max_d = kDays[static_cast<std::size_t>(m - 1)];
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (m == 2 && leap) max_d = 29;
  return d <= max_d;
}

bool parse_int(std::string_view s, std::size_t pos, std::size_t len,
               int* out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  *out = v;
  return true;
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view s) {
  int y = 0, mo = 0, d = 0;
  if (!parse_int(s, 0, 4, &y) || s.size() < 10 || s[4] != '-' ||
      !parse_int(s, 5, 2, &mo) || s[7] != '-' || !parse_int(s, 8, 2, &d)) {
    return std::nullopt;
  }
  if (!days_in_month_ok(y, mo, d)) return std::nullopt;

  int hh = 0, mi = 0, ss = 0;
  std::size_t pos = 10;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ') return std::nullopt;
    ++pos;
    if (!parse_int(s, pos, 2, &hh) || pos + 2 >= s.size() ||
        s[pos + 2] != ':' || !parse_int(s, pos + 3, 2, &mi)) {
      return std::nullopt;
    }
    pos += 5;
    if (pos < s.size() && s[pos] == ':') {
      if (!parse_int(s, pos + 1, 2, &ss)) return std::nullopt;
      pos += 3;
    }
    if (hh > 23 || mi > 59 || ss > 60) return std::nullopt;
  }

  std::int64_t offset = 0;
  if (pos < s.size()) {
    char c = s[pos];
    if (c == 'Z' || c == 'z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      int oh = 0, om = 0;
      if (!parse_int(s, pos + 1, 2, &oh)) return std::nullopt;
      std::size_t opos = pos + 3;
      if (opos < s.size() && s[opos] == ':') ++opos;
      if (!parse_int(s, opos, 2, &om)) return std::nullopt;
      pos = opos + 2;
      offset = static_cast<std::int64_t>(oh) * 3600 + om * 60;
      if (c == '-') offset = -offset;
    }
    if (pos != s.size()) return std::nullopt;
  }

  std::int64_t days = days_from_civil(y, mo, d);
  std::int64_t secs = days * 86400 + hh * 3600 + mi * 60 + ss;
  return secs - offset;
}

std::string format_timestamp(std::int64_t unix_seconds) {
  std::int64_t days = unix_seconds / 86400;
  std::int64_t rem = unix_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  Civil c = civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year,
                c.month, c.day, static_cast<int>(rem / 3600),
                static_cast<int>((rem % 3600) / 60), static_cast<int>(rem % 60));
  return buf;
}

std::string month_key(std::int64_t unix_seconds) {
  std::int64_t days = unix_seconds / 86400;
  if (unix_seconds % 86400 < 0) days -= 1;
  Civil c = civil_from_days(days);
  return make_month_key(c.year, c.month);
}

int year_of(std::int64_t unix_seconds) {
  std::int64_t days = unix_seconds / 86400;
  if (unix_seconds % 86400 < 0) days -= 1;
  return civil_from_days(days).year;
}

std::string make_month_key(int year, int month) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

std::optional<std::pair<int, int>> parse_month_key(std::string_view key) {
  int y = 0, m = 0;
  if (key.size() != 7 || key[4] != '-' || !parse_int(key, 0, 4, &y) ||
      !parse_int(key, 5, 2, &m) || m < 1 || m > 12) {
    return std::nullopt;
  }
  return std::make_pair(y, m);
}

}  // namespace atlas
