#pragma once

// Threaded TCP front ends for the session cores. Each core is guarded by a
// mutex; socket reads happen on dedicated threads and every send happens in
// the order the core produced it.

#include <atomic>
#include <condition_variable>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "aqsim/telemetry/ground_link.hpp"
#include "aqsim/telemetry/net.hpp"
#include "aqsim/telemetry/relay.hpp"
#include "aqsim/telemetry/uav_session.hpp"

namespace aqsim::telemetry {

double unix_now_s();

/// Relay listening on one port for both UAVs and ground stations; one
/// reader thread per connection plus a housekeeping thread.
class TcpRelay {
 public:
  TcpRelay(RelayConfig cfg, Endpoint listen);
  ~TcpRelay();

  void start();
  void stop();
  std::uint16_t port() const { return listener_.port(); }
  std::vector<std::string> registered_uavs() const;

 private:
  struct Conn {
    Socket sock;
    std::thread reader;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void read_loop(ConnId id, Conn* c);
  void housekeeping_loop();
  /// Performs the core's pending output; call with mu_ held.
  void flush_locked();

  RelayCore core_;
  Listener listener_;
  mutable std::mutex mu_;
  std::map<ConnId, std::unique_ptr<Conn>> conns_;
  ConnId next_id_ = 1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::thread housekeeper_;
};

/// The UAV's connection activity: dials the relay, reconnects with backoff,
/// and runs the session core. Sensor and GPS readers run elsewhere and feed
/// the snapshot source.
class TcpUavClient {
 public:
  TcpUavClient(SessionConfig cfg, Endpoint relay, UavSessionCore::CommandHandler handler,
               UavSessionCore::SnapshotSource snapshot);
  ~TcpUavClient();

  void start();
  void stop();
  bool link_ok() const;
  UavSessionCore::Phase phase() const;
  UavSessionCore::Stats stats() const;
  std::string last_error() const;

 private:
  void run();

  Endpoint relay_;
  mutable std::mutex mu_;
  UavSessionCore core_;
  std::atomic<bool> running_{false};
  std::thread thread_;
};

/// Ground station's relay connection. dispatch() blocks until the command
/// settles (ack, rejection, not-connected, or delivery-unknown).
class TcpGroundLink {
 public:
  TcpGroundLink(GroundLinkConfig cfg, Endpoint relay, GroundLinkCore::Handlers handlers);
  ~TcpGroundLink();

  void start();
  void stop();
  DispatchResult dispatch(const std::string& uav_id, Command cmd);
  bool uav_connected(const std::string& uav_id) const;
  std::vector<std::string> connected_uavs() const;
  GroundLinkCore::Phase phase() const;
  /// Waits until the handshake completed or the timeout passed.
  bool wait_ready(double timeout_s) const;

 private:
  void run();
  void flush_locked();

  Endpoint relay_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  GroundLinkCore core_;
  Socket sock_;
  std::atomic<bool> running_{false};
  std::thread thread_;
};

}  // namespace aqsim::telemetry
