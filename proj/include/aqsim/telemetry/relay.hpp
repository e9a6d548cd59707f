#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aqsim/telemetry/protocol.hpp"

namespace aqsim::telemetry {

using ConnId = std::uint64_t;

struct RelayConfig {
  std::string token = "aqsim";
  double heartbeat_period_s = 1.0;
  /// A connection silent for this long is closed.
  double idle_timeout_s = 5.0;
  /// Unauthenticated connections must say HELLO within this time.
  double hello_timeout_s = 5.0;
};

/// Rendezvous point for UAVs (which dial out from behind NAT) and ground
/// stations. Free of I/O: the owner reports connection events and decoded
/// items, then performs the sends and closes returned by take().
///
/// UAV traffic is forwarded opaquely to every ground station, wrapped in
/// "U <id> ..."; "U <id> <line>" from a ground station is unwrapped and
/// delivered to that UAV.
class RelayCore {
 public:
  struct Output {
    std::vector<std::pair<ConnId, std::string>> sends;
    std::vector<ConnId> closes;
  };

  explicit RelayCore(RelayConfig cfg = {});

  void on_open(ConnId id, double now);
  void on_item(ConnId id, const StreamDecoder::Item& item, double now);
  /// Connection gone (peer closed, I/O error, or a close we requested).
  void on_close(ConnId id, double now);
  void on_tick(double now);

  Output take();

  std::vector<std::string> registered_uavs() const;
  std::size_t ground_count() const;
  bool is_registered(const std::string& uav_id) const { return uavs_.count(uav_id) != 0; }

  struct Stats {
    std::uint64_t forwarded_up = 0;    // UAV -> ground lines
    std::uint64_t forwarded_down = 0;  // ground -> UAV lines
    std::uint64_t not_connected = 0;
    std::uint64_t rejected_hellos = 0;
  };
  const Stats& stats() const { return stats_; }

 private:
  enum class Role { Pending, Uav, Ground };
  struct Conn {
    Role role = Role::Pending;
    std::string uav_id;
    double opened = 0;
    double last_rx = 0;
    bool closing = false;
  };

  void send(ConnId id, std::string bytes) { out_.sends.emplace_back(id, std::move(bytes)); }
  void close(ConnId id);
  void broadcast_ground(const std::string& bytes);
  void handle_hello(ConnId id, Conn& c, const std::string& line);
  void reject(ConnId id, const std::string& code, const std::string& message);

  RelayConfig cfg_;
  std::map<ConnId, Conn> conns_;
  std::map<std::string, ConnId> uavs_;
  double next_heartbeat_ = 0;
  Output out_;
  Stats stats_;
};

}  // namespace aqsim::telemetry
