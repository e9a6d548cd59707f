#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "aqsim/common/error.hpp"

namespace aqsim::telemetry {

struct GpsFix {
  double lat = 0;  // decimal degrees, south negative
  double lon = 0;  // decimal degrees, west negative
  double alt = 0;  // m above mean sea level (GGA only; RMC leaves it 0)
  /// UTC time of day in seconds, as carried by the sentence.
  double utc_time_s = 0;
  int fix_quality = 0;  // GGA: 0 invalid, 1 GPS, 2 DGPS; RMC: 1 when status is 'A'
  int satellites = 0;
  double speed_knots = 0;  // RMC only
  double course_deg = 0;   // RMC only

  friend bool operator==(const GpsFix&, const GpsFix&) = default;
};

class NmeaError : public ParseError {
 public:
  enum class Kind { Checksum, Unsupported, Malformed };
  NmeaError(Kind kind, const std::string& what, std::size_t offset) : ParseError(what, offset), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// XOR of every byte between '$' and '*' (exclusive).
std::uint8_t nmea_checksum(std::string_view body);

/// Parses a GGA or RMC sentence from any talker ("$GPGGA", "$GNRMC", ...).
/// The "*hh" checksum is mandatory; a trailing CR/LF is allowed.
GpsFix parse_nmea(std::string_view sentence);

/// "ddmm.mmmm" (or "dddmm.mmmm") plus hemisphere letter to signed degrees.
double nmea_to_degrees(std::string_view ddmm, char hemisphere);

/// Formats a GGA sentence (talker GP) with its checksum, without line ending.
std::string format_gga(const GpsFix& fix);
std::string format_rmc(const GpsFix& fix);

}  // namespace aqsim::telemetry
