#include "aqsim/mission/flight_controller.hpp"

#include "aqsim/common/error.hpp"

namespace aqsim::mission {

FlightController::FlightController(ControllerConfig cfg, UavState initial, Wind wind)
    : cfg_(std::move(cfg)), state_(std::move(initial)), wind_(wind) {}

std::future<std::string> FlightController::submit(ControlInput input) {
  std::promise<std::string> p;
  auto f = p.get_future();
  std::lock_guard lk(mu_);
  queue_.push_back({std::move(input), std::move(p)});
  return f;
}

void FlightController::enqueue(ControlInput input) {
  std::lock_guard lk(mu_);
  queue_.push_back({std::move(input), std::nullopt});
}

UavState FlightController::state() const {
  std::lock_guard lk(mu_);
  return state_;
}

std::string FlightController::apply(const ControlInput& input, std::vector<Event>& events) {
  const ValidatedMission* m = mission_ ? &*mission_ : nullptr;
  try {
    if (const auto* r = std::get_if<ModeRequest>(&input)) {
      state_ = manual_override(state_, r->mode, m, &events);
    } else if (const auto* u = std::get_if<UploadMission>(&input)) {
      mission_.emplace(ValidatedMission::accept(u->plan));
      state_.target_index = 0;
      state_.steep_turn_reported_for.reset();
    } else if (const auto* l = std::get_if<LinkStatus>(&input)) {
      state_ = on_comm_status(state_, cfg_.failsafe, l->ok, state_.clock_s, &events);
    } else if (const auto* d = std::get_if<Disturbance>(&input)) {
      state_.attitude_error_deg += d->degrees;
    } else if (const auto* sp = std::get_if<SetManual>(&input)) {
      state_.manual = sp->setpoint;
    }
  } catch (const std::exception& ex) {
    Event e;
    e.t_s = state_.clock_s;
    e.kind = EventKind::CommandRejected;
    e.reason = ex.what();
    events.push_back(std::move(e));
    return ex.what();
  }
  return {};
}

std::string FlightController::apply_now(const ControlInput& input) {
  std::lock_guard lk(mu_);
  return apply(input, carried_);
}

std::vector<Event> FlightController::tick(double dt) {
  std::deque<Pending> pending;
  std::lock_guard lk(mu_);
  pending.swap(queue_);
  std::vector<Event> events;
  events.swap(carried_);
  for (auto& p : pending) {
    auto err = apply(p.input, events);
    if (p.done) p.done->set_value(std::move(err));
  }
  if (state_.status == VehicleStatus::Landed || state_.status == VehicleStatus::Crashed) return events;
  auto r = step(state_, mission_ ? &*mission_ : nullptr, cfg_, dt, wind_);
  state_ = std::move(r.state);
  for (auto& e : r.events) events.push_back(std::move(e));
  return events;
}

}  // namespace aqsim::mission
