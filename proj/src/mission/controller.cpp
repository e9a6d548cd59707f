#include "aqsim/mission/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aqsim/common/error.hpp"

namespace aqsim::mission {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

bool is_auto(FlightMode m) { return m != FlightMode::Manual; }

void change_mode(UavState& s, FlightMode to, std::string reason, double t, std::vector<Event>* events) {
  if (s.mode == to) return;
  if (!transition_allowed(s.mode, to)) {
    throw StateError(std::string("forbidden mode transition ") + std::string(to_string(s.mode)) + " -> " +
                     std::string(to_string(to)));
  }
  if (events) {
    Event e;
    e.t_s = t;
    e.kind = EventKind::ModeChange;
    e.from = s.mode;
    e.to = to;
    e.reason = std::move(reason);
    events->push_back(std::move(e));
  }
  s.mode = to;
  s.steep_turn_reported_for.reset();
}

Event make_event(double t, EventKind kind, double value = 0, std::optional<std::size_t> wp = std::nullopt) {
  Event e;
  e.t_s = t;
  e.kind = kind;
  e.value = value;
  e.waypoint = wp;
  return e;
}

}  // namespace

bool waypoint_reached(const Waypoint& position, const Waypoint& wp, double radius_m) {
  return distance_m(position, wp) <= radius_m;
}

StepResult step(const UavState& state, const ValidatedMission* mission, const ControllerConfig& cfg, double dt,
                Wind wind) {
  if (!(dt > 0 && dt <= 1)) throw DomainError("step: dt must be in (0, 1]");
  if (state.status == VehicleStatus::Landed || state.status == VehicleStatus::Crashed) {
    throw StateError(std::string("step: vehicle is ") + std::string(to_string(state.status)));
  }
  if (is_auto(state.mode) && mission == nullptr) throw StateError("step: AUTO mode without a validated mission");

  const auto& kin = cfg.kinematics;
  const auto& fs = cfg.failsafe;
  const auto& pw = cfg.power;

  StepResult r{state, {}};
  UavState& s = r.state;
  const double t = state.clock_s + dt;

  if (s.status == VehicleStatus::OnGround) {
    const bool lift_off = s.mode == FlightMode::AutoTakeoff ||
                          (s.mode == FlightMode::Manual && s.manual.altitude_m > 0 && s.manual.airspeed_mps > 0);
    if (!lift_off || s.battery_remaining_mah <= 0) {
      s.clock_s = t;
      s.airspeed_mps = 0;
      s.throttle_pct = 0;
      s = stabilize(s, 0, dt, kin.stabilization_tau_s);
      return r;
    }
    s.status = VehicleStatus::Airborne;
  }

  const bool exhausted = s.battery_remaining_mah <= 0;
  double heading_cmd = s.heading_deg;
  double alt_cmd = s.position.alt;
  double speed = s.airspeed_mps;
  double throttle = s.throttle_pct;
  const Waypoint* target = nullptr;
  std::size_t target_key = 0;

  switch (s.mode) {
    case FlightMode::Manual:
      heading_cmd = s.manual.heading_deg;
      alt_cmd = s.manual.altitude_m;
      speed = s.manual.airspeed_mps;
      throttle = s.manual.throttle_pct;
      break;
    case FlightMode::AutoTakeoff:
      alt_cmd = std::max(mission->plan().cruise_alt, fs.takeoff_alt_m + kin.takeoff_alt_margin_m);
      speed = mission->plan().cruise_speed;
      throttle = pw.takeoff_throttle_pct;
      break;
    case FlightMode::AutoMission: {
      const auto& wps = mission->waypoints();
      if (s.target_index >= wps.size()) s.target_index = 0;
      target = &wps[s.target_index];
      target_key = s.target_index;
      heading_cmd = bearing_deg(s.position, *target);
      alt_cmd = target->alt > 0 ? target->alt : mission->plan().cruise_alt;
      speed = mission->plan().cruise_speed;
      throttle = pw.cruise_throttle_pct;
      break;
    }
    case FlightMode::ReturnToBase:
      target = &mission->home();
      target_key = mission->waypoints().size();
      heading_cmd = bearing_deg(s.position, *target);
      alt_cmd = mission->plan().cruise_alt;
      speed = mission->plan().cruise_speed;
      throttle = pw.cruise_throttle_pct;
      break;
    case FlightMode::Loiter: {
      const double d = distance_m(mission->home(), s.position);
      const double outward = bearing_deg(mission->home(), s.position);
      // clockwise orbit: tangent plus a correction toward the circle
      heading_cmd = outward + 90.0 + std::atan((d - fs.loiter_radius_m) / kin.loiter_lookahead_m) / kDeg;
      alt_cmd = mission->plan().cruise_alt;
      speed = mission->plan().cruise_speed;
      throttle = pw.loiter_throttle_pct;
      break;
    }
  }
  if (exhausted) throttle = 0;

  const double heading_err = wrap180(heading_cmd - s.heading_deg);
  if (target != nullptr) {
    const double d = distance_m(s.position, *target);
    if (d > 0) {
      // rate needed to swing onto the target along a circular arc
      const double required = 2.0 * speed * std::sin(std::abs(heading_err) * kDeg) / d / kDeg;
      if (required > kin.max_turn_rate_dps && s.steep_turn_reported_for != target_key) {
        s.steep_turn_reported_for = target_key;
        r.events.push_back(make_event(t, EventKind::SteepTurn, required, target_key));
      }
    }
  }

  const double max_turn = kin.max_turn_rate_dps * dt;
  s.heading_deg = wrap360(s.heading_deg + std::clamp(heading_err, -max_turn, max_turn));

  const double climb =
      exhausted ? -kin.glide_sink_mps
                : std::clamp((alt_cmd - s.position.alt) / kin.altitude_tau_s, -kin.max_sink_mps, kin.max_climb_mps);
  const double new_alt = std::max(0.0, s.position.alt + climb * dt);

  s.airspeed_mps = std::max(0.0, speed);
  const double h = s.heading_deg * kDeg;
  const double ve = s.airspeed_mps * std::sin(h) + wind.east_mps;
  const double vn = s.airspeed_mps * std::cos(h) + wind.north_mps;
  s.position = offset_m(s.position, ve * dt, vn * dt);
  s.position.alt = new_alt;

  s.throttle_pct = std::clamp(throttle, 0.0, 100.0);
  if (!exhausted) {
    const double current = s.throttle_pct > 0 ? flight::partial_load_interpolate(pw.partial_load, s.throttle_pct).current_a : 0.0;
    s.battery_remaining_mah = std::max(0.0, s.battery_remaining_mah - current * dt / 3.6);
    if (!s.battery_low_reported && s.battery_remaining_mah <= pw.battery_low_fraction * pw.usable_capacity_mah) {
      s.battery_low_reported = true;
      r.events.push_back(make_event(t, EventKind::BatteryLow, s.battery_remaining_mah));
    }
    if (s.battery_remaining_mah <= 0) {
      s.battery_remaining_mah = 0;
      s.throttle_pct = 0;
      r.events.push_back(make_event(t, EventKind::BatteryExhausted, 0));
    }
  }

  s = stabilize(s, 0, dt, kin.stabilization_tau_s);
  s.clock_s = t;

  if (s.position.alt <= 0) {
    // touching down is only a landing when the pilot is flying it in
    if (s.mode == FlightMode::Manual) {
      s.status = VehicleStatus::Landed;
      r.events.push_back(make_event(t, EventKind::Landed));
    } else {
      s.status = VehicleStatus::Crashed;
      r.events.push_back(make_event(t, EventKind::Crashed));
    }
    s.airspeed_mps = 0;
    s.throttle_pct = 0;
    return r;
  }

  switch (s.mode) {
    case FlightMode::AutoTakeoff:
      if (s.position.alt >= fs.takeoff_alt_m) change_mode(s, FlightMode::AutoMission, "takeoff-altitude", t, &r.events);
      break;
    case FlightMode::AutoMission: {
      const auto& wps = mission->waypoints();
      const double d = distance_m(s.position, wps[s.target_index]);
      if (d <= fs.waypoint_radius_m) {
        r.events.push_back(make_event(t, EventKind::WaypointReached, d, s.target_index));
        ++s.target_index;
        s.steep_turn_reported_for.reset();
        if (s.target_index >= wps.size()) change_mode(s, FlightMode::ReturnToBase, "mission-complete", t, &r.events);
      }
      break;
    }
    case FlightMode::ReturnToBase:
      if (distance_m(s.position, mission->home()) <= fs.loiter_radius_m) {
        change_mode(s, FlightMode::Loiter, "home-reached", t, &r.events);
      }
      break;
    default:
      break;
  }
  return r;
}

UavState on_comm_status(const UavState& state, const FailsafeConfig& cfg, bool link_ok, double now_s,
                        std::vector<Event>* events) {
  UavState s = state;
  if (link_ok) {
    if (!s.comm_ok && events) events->push_back(make_event(now_s, EventKind::CommRestored));
    s.comm_ok = true;
    s.link_down_since_s.reset();
    return s;
  }
  if (s.comm_ok && events) events->push_back(make_event(now_s, EventKind::CommLost));
  s.comm_ok = false;
  if (!s.link_down_since_s) s.link_down_since_s = now_s;
  const bool flying_auto = s.mode == FlightMode::AutoTakeoff || s.mode == FlightMode::AutoMission;
  if (flying_auto && now_s - *s.link_down_since_s >= cfg.comm_loss_timeout_s) {
    change_mode(s, FlightMode::ReturnToBase, "comm-loss", now_s, events);
  }
  return s;
}

UavState manual_override(const UavState& state, FlightMode requested, const ValidatedMission* mission,
                         std::vector<Event>* events) {
  UavState s = state;
  const double t = s.clock_s;
  const bool grounded_for_good = s.status == VehicleStatus::Landed || s.status == VehicleStatus::Crashed;

  if (requested == FlightMode::Manual) {
    if (s.mode != FlightMode::Manual) {
      s.manual = {s.heading_deg, s.airspeed_mps, s.position.alt, s.throttle_pct};
      change_mode(s, FlightMode::Manual, "operator", t, events);
    }
    return s;
  }
  if (requested == FlightMode::Loiter) throw StateError("LOITER is entered automatically and cannot be requested");
  if (mission == nullptr) throw StateError(std::string(to_string(requested)) + " requires a validated mission");
  if (grounded_for_good) throw StateError(std::string("vehicle is ") + std::string(to_string(s.status)));
  if (s.mode == requested) return s;

  switch (requested) {
    case FlightMode::AutoTakeoff:
      break;
    case FlightMode::AutoMission:
      if (s.status == VehicleStatus::OnGround) throw StateError("AUTO_MISSION needs an airborne vehicle; use AUTO_TAKEOFF");
      if (s.target_index >= mission->waypoints().size()) s.target_index = 0;
      break;
    case FlightMode::ReturnToBase:
      if (s.mode == FlightMode::Loiter) return s;
      if (s.status == VehicleStatus::OnGround) throw StateError("RETURN_TO_BASE needs an airborne vehicle");
      break;
    default:
      break;
  }
  if (!transition_allowed(s.mode, requested)) {
    throw StateError(std::string("cannot switch ") + std::string(to_string(s.mode)) + " -> " +
                     std::string(to_string(requested)));
  }
  change_mode(s, requested, "operator", t, events);
  return s;
}

UavState stabilize(const UavState& state, double disturbance_deg, double dt, double tau_s) {
  UavState s = state;
  s.attitude_error_deg = (s.attitude_error_deg + disturbance_deg) * std::exp(-dt / tau_s);
  return s;
}

}  // namespace aqsim::mission
