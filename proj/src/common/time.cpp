#include "aqsim/common/time.hpp"

#include <cstdio>

#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"

namespace aqsim {

std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss tod{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()), static_cast<int>(tod.subseconds().count()));
  return buf;
}

namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw ParseError("timestamp too short", s.size());
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') throw ParseError("expected digit in timestamp", i);
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c) throw ParseError(std::string("expected '") + c + "' in timestamp", pos);
}

}  // namespace

Timestamp parse_iso8601(std::string_view s) {
  using namespace std::chrono;
  const int y = digits(s, 0, 4);
  expect(s, 4, '-');
  const int mo = digits(s, 5, 2);
  expect(s, 7, '-');
  const int d = digits(s, 8, 2);
  expect(s, 10, 'T');
  const int hh = digits(s, 11, 2);
  expect(s, 13, ':');
  const int mm = digits(s, 14, 2);
  expect(s, 16, ':');
  const int ss = digits(s, 17, 2);
  std::size_t pos = 19;
  int ms = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int scale = 100;
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      ms += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == start) throw ParseError("empty fractional seconds", pos);
  }
  expect(s, pos, 'Z');
  if (pos + 1 != s.size()) throw ParseError("trailing characters after timestamp", pos + 1);

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) throw ParseError("timestamp field out of range", 0);
  return time_point_cast<milliseconds>(sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss}) + milliseconds{ms};
}

double parse_duration_s(std::string_view text) {
  text = text::trim(text);
  if (text.empty()) throw ParseError("empty duration", 0);
  double scale = 1.0;
  switch (text.back()) {
    case 's': scale = 1.0; break;
    case 'm': scale = 60.0; break;
    case 'h': scale = 3600.0; break;
    case 'd': scale = 86400.0; break;
    case 'y': scale = 365.0 * 86400.0; break;
    default: scale = 0.0;
  }
  auto number = scale == 0.0 ? text : text.substr(0, text.size() - 1);
  if (scale == 0.0) scale = 1.0;
  const auto v = text::to_double(number);
  if (!v || *v <= 0) throw ParseError("invalid duration '" + std::string(text) + "'", 0);
  return *v * scale;
}

}  // namespace aqsim
