#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aqsim/telemetry/backoff.hpp"
#include "aqsim/telemetry/protocol.hpp"

namespace aqsim::telemetry {

struct GroundLinkConfig {
  std::string token = "aqsim";
  double heartbeat_period_s = 1.0;
  double idle_timeout_s = 5.0;
  /// Time to wait for an ack before reporting delivery-unknown.
  double command_timeout_s = 5.0;
  double reconnect_initial_s = 0.1;
  double reconnect_max_s = 5.0;
  /// First seq handed out. Real-time stations seed it from the clock so a
  /// restarted station never reuses seqs a UAV still remembers.
  std::uint64_t first_seq = 1;
};

enum class DispatchStatus { Pending, Acked, Rejected, NotConnected, DeliveryUnknown };

std::string_view to_string(DispatchStatus s);

struct DispatchResult {
  DispatchStatus status = DispatchStatus::Pending;
  std::uint64_t seq = 0;
  std::string uav_id;
  std::string message;
};

/// Ground-station end of the relay connection, free of I/O. Times are UNIX seconds.
class GroundLinkCore {
 public:
  enum class Phase { Disconnected, Handshaking, Ready, Failed };

  struct Handlers {
    std::function<void(const std::string& uav, const DataLine&, double now)> data;
    std::function<void(const std::string& uav, const StatusLine&, double now)> status;
    std::function<void(const std::string& uav, const VideoHeader&, const std::string& payload, double now)> video;
    std::function<void(const std::string& uav, bool connected, double now)> presence;
    std::function<void(const DispatchResult&)> command_done;
    /// Lines that failed to parse, for diagnostics.
    std::function<void(const std::string& uav, const std::string& line, const std::string& error)> bad_line;
  };

  GroundLinkCore(GroundLinkConfig cfg, Handlers handlers);

  bool should_connect(double now) const;
  void on_connected(double now);
  void on_connect_failed(double now);
  void on_disconnected(double now);
  void on_item(const StreamDecoder::Item& item, double now);
  void on_tick(double now);

  std::vector<std::string> take_outbox();
  bool wants_close() const { return close_requested_; }

  /// Sends a command. seq 0 assigns a fresh one; a non-zero seq re-sends
  /// (a retry after delivery-unknown, executed at most once by the UAV).
  /// Returns the seq; the outcome arrives through result()/command_done.
  std::uint64_t dispatch(const std::string& uav_id, Command cmd, double now);
  std::optional<DispatchResult> result(std::uint64_t seq) const;

  bool uav_connected(const std::string& uav_id) const { return present_.count(uav_id) != 0; }
  std::vector<std::string> connected_uavs() const { return {present_.begin(), present_.end()}; }
  /// Seconds since anything was heard from the UAV, if it ever was.
  std::optional<double> uav_silence(const std::string& uav_id, double now) const;
  Phase phase() const { return phase_; }
  const std::string& last_error() const { return last_error_; }

 private:
  void finish(std::uint64_t seq, DispatchStatus st, std::string message);
  void send(std::string s) { outbox_.push_back(std::move(s)); }

  GroundLinkConfig cfg_;
  Handlers h_;
  Phase phase_ = Phase::Disconnected;
  Backoff backoff_;
  double next_attempt_ = 0;
  double last_rx_ = 0;
  double next_heartbeat_ = 0;
  bool close_requested_ = false;
  std::string last_error_;
  std::uint64_t next_seq_;
  std::set<std::string> present_;
  std::map<std::string, double> last_heard_;
  struct Pending {
    double deadline;
  };
  std::map<std::uint64_t, Pending> pending_;
  std::map<std::uint64_t, DispatchResult> results_;
  std::vector<std::string> outbox_;
};

}  // namespace aqsim::telemetry
