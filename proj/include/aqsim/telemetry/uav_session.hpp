#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aqsim/mission/types.hpp"
#include "aqsim/telemetry/backoff.hpp"
#include "aqsim/telemetry/protocol.hpp"

namespace aqsim::telemetry {

struct SessionConfig {
  std::string uav_id = "uav-1";
  std::string token = "aqsim";
  double data_period_s = 1.0;
  double status_period_s = 1.0;
  double heartbeat_period_s = 1.0;
  /// Silence after which the link is reported down to the flight controller.
  double link_quiet_s = 1.5;
  /// Silence after which the connection is presumed dead and closed.
  double idle_timeout_s = 5.0;
  double video_fps = 5.0;
  /// Encoder plus buffering delay between capture and transmission.
  double video_pipeline_delay_s = 3.5;
  std::size_t video_frame_bytes = 1024;
  double reconnect_initial_s = 0.1;
  double reconnect_max_s = 5.0;
  std::size_t dedupe_window = 64;
};

std::vector<std::string> validate(const SessionConfig& cfg);

/// What the UAV currently knows about itself, read when a line is due.
struct UavSnapshot {
  std::optional<sensors::SensorFrame> frame;
  std::optional<Position> gps;
  std::optional<mission::UavState> state;
};

/// UAV end of the relay connection, free of I/O. Times are UNIX seconds.
///
/// The owner feeds connection events, received lines and clock ticks, and
/// writes whatever take_outbox() returns to the socket.
class UavSessionCore {
 public:
  enum class Phase { Disconnected, Handshaking, Ready, Failed };

  /// Executes a command; the returned ack is sent and cached under its seq.
  using CommandHandler = std::function<Ack(const Command&)>;
  using SnapshotSource = std::function<UavSnapshot()>;

  UavSessionCore(SessionConfig cfg, CommandHandler handler, SnapshotSource snapshot);

  /// True when disconnected and the reconnect delay has elapsed.
  bool should_connect(double now) const;
  void on_connected(double now);
  void on_connect_failed(double now);
  void on_disconnected(double now);
  void on_line(std::string_view line, double now);
  void on_tick(double now);

  std::vector<std::string> take_outbox();
  /// Set when the connection should be closed by the owner.
  bool wants_close() const { return close_requested_; }

  /// Link health for the failsafe: ready and heard from within link_quiet_s.
  bool link_ok(double now) const;
  Phase phase() const { return phase_; }
  const std::string& last_error() const { return last_error_; }
  bool data_enabled() const { return data_on_; }
  bool video_enabled() const { return video_on_; }

  struct Stats {
    std::uint64_t data_lines = 0;
    std::uint64_t status_lines = 0;
    std::uint64_t video_frames = 0;
    std::uint64_t commands_executed = 0;
    std::uint64_t duplicate_commands = 0;
    std::uint64_t connects = 0;
  };
  const Stats& stats() const { return stats_; }
  const SessionConfig& config() const { return cfg_; }

 private:
  void handle_command(const Command& c);
  void send(std::string line) { outbox_.push_back(std::move(line)); }
  void drop_connection(double now, std::string reason);

  SessionConfig cfg_;
  CommandHandler handler_;
  SnapshotSource snapshot_;
  Phase phase_ = Phase::Disconnected;
  Backoff backoff_;
  double next_attempt_ = 0;
  double last_rx_ = 0;
  double next_heartbeat_ = 0;
  double next_status_ = 0;
  bool close_requested_ = false;
  std::string last_error_;

  bool data_on_ = false;
  double next_data_ = 0;
  bool video_on_ = false;
  double next_capture_ = 0;
  std::uint64_t next_frame_no_ = 0;
  struct PendingFrame {
    double release_s;
    std::uint64_t frame_no;
    std::int64_t source_ms;
  };
  std::deque<PendingFrame> pipeline_;

  std::map<std::uint64_t, Ack> acks_;  // dedupe window
  std::uint64_t highest_seq_ = 0;

  std::vector<std::string> outbox_;
  Stats stats_;
};

/// Deterministic placeholder bytes for video frame `frame_no`.
std::string synthetic_video_payload(std::uint64_t frame_no, std::size_t bytes);

inline Timestamp unix_seconds_to_timestamp(double s) {
  return from_unix_ms(static_cast<std::int64_t>(std::llround(s * 1000.0)));
}

}  // namespace aqsim::telemetry
