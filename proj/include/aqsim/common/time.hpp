#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace aqsim {

/// UTC instant with millisecond resolution. All wire and storage timestamps use it.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Millis = std::chrono::milliseconds;

inline Timestamp from_unix_ms(std::int64_t ms) { return Timestamp{Millis{ms}}; }
inline std::int64_t to_unix_ms(Timestamp t) { return t.time_since_epoch().count(); }

/// "YYYY-MM-DDTHH:MM:SS.mmmZ"
std::string format_iso8601(Timestamp t);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff]Z". Throws ParseError.
Timestamp parse_iso8601(std::string_view text);

/// Parses durations like "90", "90s", "15m", "1h", "8h", "1y" (365 d). Returns seconds.
double parse_duration_s(std::string_view text);

}  // namespace aqsim
