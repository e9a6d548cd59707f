#include "aqsim/telemetry/nmea.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "aqsim/common/text.hpp"

namespace aqsim::telemetry {

namespace {

using Kind = NmeaError::Kind;

// uppercase only, as transmitted by receivers
int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

double time_field(std::string_view f, std::size_t offset) {
  if (f.empty()) return 0;
  if (f.size() < 6) throw NmeaError(Kind::Malformed, "nmea: bad time field", offset);
  const auto hh = text::to_int(f.substr(0, 2));
  const auto mm = text::to_int(f.substr(2, 2));
  const auto ss = text::to_double(f.substr(4));
  if (!hh || !mm || !ss || *hh > 23 || *mm > 59 || *ss >= 61) throw NmeaError(Kind::Malformed, "nmea: bad time field", offset);
  return *hh * 3600.0 + *mm * 60.0 + *ss;
}

double number_field(std::string_view f, std::size_t offset, const char* what) {
  if (f.empty()) return 0;
  const auto v = text::to_double(f);
  if (!v) throw NmeaError(Kind::Malformed, std::string("nmea: bad ") + what, offset);
  return *v;
}

std::string ddmm(double deg, int deg_digits) {
  const double a = std::abs(deg);
  int d = static_cast<int>(a);
  double m = (a - d) * 60.0;
  // rounding to 4 decimals may carry into the degree
  if (std::round(m * 1e4) >= 60.0 * 1e4) {
    ++d;
    m = 0;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*d%07.4f", deg_digits, d, m);
  return buf;
}

std::string with_checksum(const std::string& body) {
  char tail[8];
  std::snprintf(tail, sizeof tail, "*%02X", nmea_checksum(body));
  return "$" + body + tail;
}

std::string hhmmss(double t) {
  const double total = std::round(t * 100.0) / 100.0;
  const int h = static_cast<int>(total / 3600) % 24;
  const int m = static_cast<int>(std::fmod(total, 3600.0) / 60);
  const double s = std::fmod(total, 60.0);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d%02d%05.2f", h, m, s);
  return buf;
}

}  // namespace

std::uint8_t nmea_checksum(std::string_view body) {
  std::uint8_t x = 0;
  for (char c : body) x ^= static_cast<std::uint8_t>(c);
  return x;
}

double nmea_to_degrees(std::string_view f, char hemisphere) {
  const auto dot = f.find('.');
  const std::size_t int_len = dot == std::string_view::npos ? f.size() : dot;
  if (int_len < 3) throw NmeaError(Kind::Malformed, "nmea: bad coordinate", 0);
  const auto deg = text::to_int(f.substr(0, int_len - 2));
  const auto min = text::to_double(f.substr(int_len - 2));
  if (!deg || !min || *deg < 0 || *min < 0 || *min >= 60) throw NmeaError(Kind::Malformed, "nmea: bad coordinate", 0);
  double v = *deg + *min / 60.0;
  switch (hemisphere) {
    case 'N': case 'E': break;
    case 'S': case 'W': v = -v; break;
    default: throw NmeaError(Kind::Malformed, "nmea: bad hemisphere", 0);
  }
  return v;
}

GpsFix parse_nmea(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  if (s.empty() || s.front() != '$') throw NmeaError(Kind::Malformed, "nmea: sentence must start with '$'", 0);
  const auto star = s.rfind('*');
  if (star == std::string_view::npos || star + 3 != s.size()) {
    throw NmeaError(Kind::Checksum, "nmea: missing checksum", star == std::string_view::npos ? s.size() : star);
  }
  const int hi = hex_digit(s[star + 1]), lo = hex_digit(s[star + 2]);
  if (hi < 0 || lo < 0) throw NmeaError(Kind::Checksum, "nmea: bad checksum digits", star + 1);
  const auto body = s.substr(1, star - 1);
  if (nmea_checksum(body) != (hi << 4 | lo)) throw NmeaError(Kind::Checksum, "nmea: checksum mismatch", star + 1);
  for (char c : body) {
    if (c < 0x20 || c > 0x7e || c == '$' || c == '*') throw NmeaError(Kind::Malformed, "nmea: illegal character", 1);
  }

  const auto f = text::split(body, ',');
  // byte offset of field i within the sentence
  std::vector<std::size_t> at(f.size());
  for (std::size_t i = 0, pos = 1; i < f.size(); ++i) {
    at[i] = pos;
    pos += f[i].size() + 1;
  }
  if (f[0].size() != 5) throw NmeaError(Kind::Unsupported, "nmea: bad address field", 1);
  const auto type = f[0].substr(2);

  auto coord = [&](std::size_t i) -> double {
    if (f[i].empty() && f[i + 1].empty()) return 0;
    if (f[i + 1].size() != 1) throw NmeaError(Kind::Malformed, "nmea: bad hemisphere", at[i + 1]);
    try {
      return nmea_to_degrees(f[i], f[i + 1][0]);
    } catch (const NmeaError& e) {
      throw NmeaError(e.kind(), "nmea: bad coordinate", at[i]);
    }
  };

  GpsFix fix;
  if (type == "GGA") {
    if (f.size() < 15) throw NmeaError(Kind::Malformed, "nmea: GGA needs 14 fields", s.size());
    fix.utc_time_s = time_field(f[1], at[1]);
    fix.lat = coord(2);
    fix.lon = coord(4);
    fix.fix_quality = static_cast<int>(number_field(f[6], at[6], "fix quality"));
    fix.satellites = static_cast<int>(number_field(f[7], at[7], "satellite count"));
    fix.alt = number_field(f[9], at[9], "altitude");
    if (!f[10].empty() && f[10] != "M") throw NmeaError(Kind::Malformed, "nmea: altitude unit must be M", at[10]);
  } else if (type == "RMC") {
    if (f.size() < 12) throw NmeaError(Kind::Malformed, "nmea: RMC needs 11 fields", s.size());
    fix.utc_time_s = time_field(f[1], at[1]);
    if (f[2] != "A" && f[2] != "V") throw NmeaError(Kind::Malformed, "nmea: bad RMC status", at[2]);
    fix.fix_quality = f[2] == "A" ? 1 : 0;
    fix.lat = coord(3);
    fix.lon = coord(5);
    fix.speed_knots = number_field(f[7], at[7], "speed");
    fix.course_deg = number_field(f[8], at[8], "course");
  } else {
    throw NmeaError(Kind::Unsupported, "nmea: unsupported sentence " + std::string(f[0]), 1);
  }
  return fix;
}

std::string format_gga(const GpsFix& fix) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "GPGGA,%s,%s,%c,%s,%c,%d,%02d,0.9,%.1f,M,0.0,M,,", hhmmss(fix.utc_time_s).c_str(),
                ddmm(fix.lat, 2).c_str(), fix.lat < 0 ? 'S' : 'N', ddmm(fix.lon, 3).c_str(), fix.lon < 0 ? 'W' : 'E',
                fix.fix_quality, fix.satellites, fix.alt);
  return with_checksum(buf);
}

std::string format_rmc(const GpsFix& fix) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "GPRMC,%s,%c,%s,%c,%s,%c,%.1f,%.1f,010126,,", hhmmss(fix.utc_time_s).c_str(),
                fix.fix_quality > 0 ? 'A' : 'V', ddmm(fix.lat, 2).c_str(), fix.lat < 0 ? 'S' : 'N',
                ddmm(fix.lon, 3).c_str(), fix.lon < 0 ? 'W' : 'E', fix.speed_knots, fix.course_deg);
  return with_checksum(buf);
}

}  // namespace aqsim::telemetry
