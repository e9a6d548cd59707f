#pragma once

// Line protocol between UAV, relay and ground station.
//
// Every message is one ASCII line terminated by '\n' and starts with a one
// letter tag followed by a single space. Fields are separated by exactly one
// space. Grammar (<ts> is "YYYY-MM-DDTHH:MM:SS.mmmZ"):
//
//   D <ts> <lat> <lon> <alt> <hum> <temp> <dust> <o3> <co2> <co> <lpg> <smoke> [W]
//       lat/lon 7 decimals, alt and the first five sensor fields 2 decimals,
//       co/lpg/smoke integers (truncated toward zero). A trailing "W" marks a
//       frame taken while the sensors were warming up (invalid).
//   C <seq> <KIND> [arg]     KIND: START_DATA STOP_DATA START_VIDEO STOP_VIDEO
//                            RTB SET_MODE <MODE> UPLOAD_MISSION <json...>
//                            (the JSON runs to end of line and has no newline)
//   A <seq> OK | A <seq> ERR <message...>
//   H <unix_ms>
//   S <ts> <mode> <status> <lat> <lon> <alt> <heading> <airspeed> <battery_mah>
//     <throttle> <link 0|1> <target_index>        vehicle status, 1 Hz
//   V <frame_no> <source_unix_ms> <len>     followed by exactly <len> raw bytes
//
// Session set-up (first line on a connection):
//   HELLO UAV <uav_id> <token> <version>  |  HELLO GROUND <token> <version>
//   answered by "OK <version>" or "ERR <code> <message...>".
//
// Between relay and ground stations every UAV-side message is wrapped as
//   U <uav_id> <inner message>
// and the relay adds "U <id> R" (registered), "U <id> X" (disconnected) and
// "U <id> E <seq> not-connected" (command for an absent UAV).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aqsim/common/time.hpp"
#include "aqsim/mission/types.hpp"
#include "aqsim/sensors/parameter.hpp"

namespace aqsim::telemetry {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxLineBytes = 256 * 1024;
inline constexpr std::size_t kMaxVideoBytes = 4 * 1024 * 1024;

struct Position {
  double lat = 0;
  double lon = 0;
  double alt = 0;

  friend bool operator==(const Position&, const Position&) = default;
};

struct DataLine {
  Timestamp ts{};
  Position pos;
  sensors::SensorFrame frame;

  friend bool operator==(const DataLine&, const DataLine&) = default;
};

enum class CommandKind { StartData, StopData, StartVideo, StopVideo, SetMode, UploadMission, Rtb };

std::string_view to_string(CommandKind k);
std::optional<CommandKind> parse_command_kind(std::string_view s);

struct Command {
  std::uint64_t seq = 0;
  CommandKind kind = CommandKind::StartData;
  std::optional<mission::FlightMode> mode;  // SET_MODE
  std::string mission_json;                 // UPLOAD_MISSION, single line

  friend bool operator==(const Command&, const Command&) = default;
};

struct Ack {
  std::uint64_t seq = 0;
  bool ok = true;
  std::string message;

  friend bool operator==(const Ack&, const Ack&) = default;
};

struct Heartbeat {
  std::int64_t unix_ms = 0;
  friend bool operator==(const Heartbeat&, const Heartbeat&) = default;
};

struct StatusLine {
  Timestamp ts{};
  mission::FlightMode mode = mission::FlightMode::Manual;
  mission::VehicleStatus status = mission::VehicleStatus::OnGround;
  Position pos;
  double heading_deg = 0;
  double airspeed_mps = 0;
  double battery_mah = 0;
  double throttle_pct = 0;
  bool link_ok = true;
  std::uint64_t target_index = 0;

  friend bool operator==(const StatusLine&, const StatusLine&) = default;
};

struct VideoHeader {
  std::uint64_t frame_no = 0;
  std::int64_t source_unix_ms = 0;
  std::size_t length = 0;

  friend bool operator==(const VideoHeader&, const VideoHeader&) = default;
};

using Message = std::variant<DataLine, Command, Ack, Heartbeat, StatusLine, VideoHeader>;

/// Encoders return the line including its terminating '\n'.
std::string encode_frame(const sensors::SensorFrame& frame, const Position& pos, Timestamp ts);
std::string encode(const Message& m);

/// Parses one line (with or without '\n'; trailing spaces, tabs and CR are
/// tolerated). Throws ParseError whose offset is the byte where the line
/// stopped matching the grammar.
DataLine decode_frame(std::string_view line);
Message decode(std::string_view line);

/// Quantises a frame and position exactly as the encoder does, so
/// decode(encode(x)) == quantize(x).
DataLine quantize(const DataLine& d);

struct Hello {
  enum class Role { Uav, Ground } role = Role::Uav;
  std::string uav_id;  // empty for ground stations
  std::string token;
  int version = kProtocolVersion;

  friend bool operator==(const Hello&, const Hello&) = default;
};

std::string encode_hello(const Hello& h);
Hello decode_hello(std::string_view line);

/// Ids and tokens are 1..64 chars of [A-Za-z0-9_.-].
bool valid_identifier(std::string_view s);

/// Relay-to-ground wrapper.
struct Envelope {
  std::string uav_id;
  std::string inner;  // inner line without '\n'
};

std::string wrap(std::string_view uav_id, std::string_view inner_line);
Envelope unwrap(std::string_view line);

/// Incremental splitter for a byte stream of lines and video payloads.
class StreamDecoder {
 public:
  struct Item {
    std::string line;     // without '\n'
    std::string payload;  // raw bytes following a video header
  };

  /// Appends bytes; complete items become available from next(), which
  /// throws ParseError when a line exceeds kMaxLineBytes or a video header
  /// is malformed.
  void feed(std::string_view bytes);
  std::optional<Item> next();
  std::size_t buffered() const { return buf_.size() - pos_; }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
  std::size_t scanned_ = 0;
};

/// Byte length announced by a "V ..." or "U <id> V ..." header line, if it is one.
std::optional<std::size_t> video_payload_length(std::string_view line);

}  // namespace aqsim::telemetry
