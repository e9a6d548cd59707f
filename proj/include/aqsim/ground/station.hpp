#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aqsim/ground/alerts.hpp"
#include "aqsim/ground/store.hpp"
#include "aqsim/telemetry/ground_link.hpp"

namespace aqsim::ground {

/// One server-push event. `data` is a single line: wire-format lines wrapped
/// as "U <id> ..." for frames, status, presence and video headers, compact
/// JSON for alerts and command results.
struct LiveEvent {
  std::uint64_t id = 0;
  std::string name;
  std::string data;
};

/// Fan-out of live events to any number of subscribers. Each subscriber has
/// a bounded queue; when it overflows the oldest events are dropped.
class LiveHub {
 public:
  class Subscription {
   public:
    /// Next event, or none after the timeout or once the hub closed.
    std::optional<LiveEvent> wait(std::chrono::milliseconds timeout);
    std::uint64_t dropped() const;
    bool closed() const;

   private:
    friend class LiveHub;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<LiveEvent> queue_;
    std::uint64_t dropped_ = 0;
    bool closed_ = false;
  };

  explicit LiveHub(std::size_t queue_limit = 1024) : limit_(queue_limit) {}
  std::shared_ptr<Subscription> subscribe();
  void unsubscribe(const std::shared_ptr<Subscription>& s);
  void publish(std::string name, std::string data);
  /// Wakes every subscriber and refuses new events.
  void close();
  std::size_t subscribers() const;

 private:
  std::size_t limit_;
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<Subscription>> subs_;
  std::uint64_t next_id_ = 1;
  bool closed_ = false;
};

struct UavView {
  std::string uav_id;
  bool connected = false;
  std::optional<double> last_heard_s;  // UNIX seconds, server clock
  std::optional<telemetry::StatusLine> status;
  std::optional<telemetry::DataLine> latest;
  std::optional<telemetry::VideoHeader> video;
  double video_latency_s = 0;
  std::uint64_t frames = 0;
  std::uint64_t video_frames = 0;
};

struct StationConfig {
  AlertConfig alerts;
  std::size_t live_queue = 1024;
};

/// Ground-station state: persists telemetry, runs alerting and keeps the
/// latest view of every UAV. Feed it through handlers(); it is thread-safe.
class GroundStation {
 public:
  using Dispatcher = std::function<telemetry::DispatchResult(const std::string& uav, telemetry::Command)>;

  GroundStation(MeasurementStore& store, StationConfig cfg = {});

  /// Handlers for a GroundLinkCore or TcpGroundLink. The station must
  /// outlive the link.
  telemetry::GroundLinkCore::Handlers handlers();

  void on_data(const std::string& uav, const telemetry::DataLine& d, double now);
  void on_status(const std::string& uav, const telemetry::StatusLine& s, double now);
  void on_video(const std::string& uav, const telemetry::VideoHeader& v, double now);
  void on_presence(const std::string& uav, bool connected, double now);
  void on_command_done(const telemetry::DispatchResult& r);

  void set_dispatcher(Dispatcher d);
  /// Dispatches through the link; NotConnected when no link is attached.
  telemetry::DispatchResult command(const std::string& uav, telemetry::Command c);

  std::optional<UavView> uav(const std::string& id) const;
  std::vector<std::string> uavs() const;

  MeasurementStore& store() { return store_; }
  const MeasurementStore& store() const { return store_; }
  LiveHub& live() { return live_; }
  const AlertConfig& alert_config() const { return alerts_.config(); }

  struct Stats {
    std::uint64_t frames = 0;
    std::uint64_t stored = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t alerts = 0;
    std::uint64_t storage_errors = 0;
  };
  Stats stats() const;

 private:
  MeasurementStore& store_;
  LiveHub live_;
  mutable std::mutex mu_;
  AlertEngine alerts_;
  std::map<std::string, UavView> views_;
  Dispatcher dispatcher_;
  Stats stats_;
};

std::string alert_json(const StoredAlert& a);
std::string dispatch_json(const telemetry::DispatchResult& r);

}  // namespace aqsim::ground
