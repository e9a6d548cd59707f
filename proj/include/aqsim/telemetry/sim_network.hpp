#pragma once

#include <memory>
#include <vector>

#include "aqsim/telemetry/ground_link.hpp"
#include "aqsim/telemetry/link_sim.hpp"
#include "aqsim/telemetry/relay.hpp"
#include "aqsim/telemetry/uav_session.hpp"

namespace aqsim::telemetry {

/// UAVs, one relay and ground stations wired together through simulated
/// links on a virtual clock. Entirely single-threaded and deterministic: the
/// same configuration and seed replay the same byte streams.
class SimNetwork {
 public:
  struct Config {
    LinkConfig uav_link;                           // cellular leg, per direction
    LinkConfig ground_link = LinkConfig::ideal();  // relay <-> ground station
    RelayConfig relay;
    double tick_s = 0.01;
  };

  SimNetwork(Config cfg, double start_unix_s);

  /// Returns the index of the new UAV. Outages are in seconds relative to start.
  std::size_t add_uav(SessionConfig cfg, UavSessionCore::CommandHandler handler,
                      UavSessionCore::SnapshotSource snapshot, std::vector<Outage> outages_s = {});
  std::size_t add_ground(GroundLinkConfig cfg, GroundLinkCore::Handlers handlers);

  /// Runs ticks until the clock reaches t (UNIX seconds).
  void advance_to(double t);
  void advance_by(double dt) { advance_to(now_ + dt); }
  double now() const { return now_; }
  double start() const { return start_; }

  UavSessionCore& uav(std::size_t i) { return uavs_.at(i)->core; }
  GroundLinkCore& ground(std::size_t i) { return grounds_.at(i)->core; }
  RelayCore& relay() { return relay_; }

  struct LinkStats {
    std::uint64_t sent = 0;       // payloads committed to the cellular link
    std::uint64_t delivered = 0;  // payloads that reached the far end
    std::uint64_t lost = 0;       // payload losses (each broke the connection)
    std::uint64_t discarded = 0;  // in flight when a connection broke
    std::uint64_t disconnects = 0;
  };
  LinkStats uav_link_stats(std::size_t i) const;
  bool uav_connected(std::size_t i) const { return uavs_.at(i)->connected; }

 private:
  struct UavSlot {
    UavSlot(SessionConfig c, UavSessionCore::CommandHandler h, UavSessionCore::SnapshotSource s, LinkConfig up_cfg,
            LinkConfig down_cfg, Rng up_rng, Rng down_rng, std::vector<Outage> o);
    UavSessionCore core;
    LinkChannel<std::string> up;
    LinkChannel<std::string> down;
    StreamDecoder at_relay;
    StreamDecoder at_uav;
    std::vector<Outage> outages;
    bool connected = false;
    bool closing = false;  // relay closed; drains in-flight bytes first
    ConnId conn = 0;
    LinkStats stats;
  };
  struct GroundSlot {
    GroundSlot(GroundLinkConfig c, GroundLinkCore::Handlers h, LinkConfig cfg, Rng a, Rng b);
    GroundLinkCore core;
    LinkChannel<std::string> up;
    LinkChannel<std::string> down;
    StreamDecoder at_relay;
    StreamDecoder at_ground;
    bool connected = false;
    bool closing = false;
    ConnId conn = 0;
  };

  void tick(double t);
  bool in_outage(const UavSlot& u, double t) const;
  void drop_uav(UavSlot& u, double t);
  void drop_ground(GroundSlot& g, double t);
  void flush(double t);

  Config cfg_;
  double start_;
  double now_;
  std::uint64_t tick_index_ = 0;
  Rng rng_;
  RelayCore relay_;
  ConnId next_conn_ = 1;
  std::vector<std::unique_ptr<UavSlot>> uavs_;
  std::vector<std::unique_ptr<GroundSlot>> grounds_;
};

}  // namespace aqsim::telemetry
