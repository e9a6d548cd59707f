#pragma once

#include <deque>
#include <future>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aqsim/mission/controller.hpp"

namespace aqsim::mission {

struct ModeRequest {
  FlightMode mode;
};
struct UploadMission {
  MissionPlan plan;
};
struct LinkStatus {
  bool ok;
};
struct Disturbance {
  double degrees;
};
struct SetManual {
  ManualSetpoint setpoint;
};

using ControlInput = std::variant<ModeRequest, UploadMission, LinkStatus, Disturbance, SetManual>;

/// Owns the vehicle state. Inputs from other threads are queued and applied
/// in order at the next step boundary, so tick() is the only mutator.
class FlightController {
 public:
  FlightController(ControllerConfig cfg, UavState initial, Wind wind = {});

  /// Queues an input; the future yields "" on success or the rejection reason.
  std::future<std::string> submit(ControlInput input);
  void enqueue(ControlInput input);

  /// Drains the queue then advances the model by dt.
  std::vector<Event> tick(double dt);

  /// Applies an input immediately (single-threaded use). Returns "" or the
  /// rejection reason; resulting events are returned by the next tick().
  std::string apply_now(const ControlInput& input);

  UavState state() const;
  const ValidatedMission* mission() const { return mission_ ? &*mission_ : nullptr; }
  const ControllerConfig& config() const { return cfg_; }
  void set_wind(Wind w) { wind_ = w; }

 private:
  struct Pending {
    ControlInput input;
    std::optional<std::promise<std::string>> done;
  };

  std::string apply(const ControlInput& input, std::vector<Event>& events);

  ControllerConfig cfg_;
  UavState state_;
  Wind wind_;
  std::optional<ValidatedMission> mission_;
  std::vector<Event> carried_;
  mutable std::mutex mu_;
  std::deque<Pending> queue_;
};

}  // namespace aqsim::mission
