#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aqsim/flight/dynamics.hpp"
#include "aqsim/mission/geo.hpp"

namespace aqsim::mission {

struct MissionPlan {
  Waypoint home;
  std::vector<Waypoint> waypoints;
  double cruise_speed = 20.0;  // m/s
  double cruise_alt = 120.0;   // m
};

enum class FlightMode { Manual, AutoTakeoff, AutoMission, ReturnToBase, Loiter };

std::string_view to_string(FlightMode m);
std::optional<FlightMode> parse_mode(std::string_view s);

/// Edges of the flight-mode graph. Everything else is forbidden.
bool transition_allowed(FlightMode from, FlightMode to);

enum class VehicleStatus { OnGround, Airborne, Landed, Crashed };

std::string_view to_string(VehicleStatus s);

/// Pilot stick inputs while in MANUAL, reduced to hold targets.
struct ManualSetpoint {
  double heading_deg = 0;
  double airspeed_mps = 0;
  double altitude_m = 0;
  double throttle_pct = 0;
};

struct UavState {
  Waypoint position;
  double heading_deg = 0;
  double airspeed_mps = 0;
  FlightMode mode = FlightMode::Manual;
  VehicleStatus status = VehicleStatus::OnGround;
  double battery_remaining_mah = 0;
  double throttle_pct = 0;
  double attitude_error_deg = 0;
  bool comm_ok = true;
  double clock_s = 0;

  /// Index of the next mission waypoint (first unvisited).
  std::size_t target_index = 0;
  std::optional<double> link_down_since_s;
  bool battery_low_reported = false;
  std::optional<std::size_t> steep_turn_reported_for;
  ManualSetpoint manual;
};

struct FailsafeConfig {
  double comm_loss_timeout_s = 5.0;
  double waypoint_radius_m = 30.0;
  double takeoff_alt_m = 100.0;
  double loiter_radius_m = 200.0;
};

struct KinematicsConfig {
  double max_turn_rate_dps = 30.0;
  double altitude_tau_s = 4.0;
  double max_climb_mps = 5.0;
  double max_sink_mps = 3.0;
  /// Take-off climbs toward max(cruise_alt, takeoff_alt + margin).
  double takeoff_alt_margin_m = 10.0;
  double glide_sink_mps = 3.0;
  double stabilization_tau_s = 0.3;
  /// Loiter guidance blends toward the orbit over this distance.
  double loiter_lookahead_m = 60.0;
};

struct PowerConfig {
  std::vector<flight::PartialLoadRow> partial_load = flight::stick60_partial_load();
  double usable_capacity_mah = 5400.0;
  double takeoff_throttle_pct = 100.0;
  double cruise_throttle_pct = 70.0;
  double loiter_throttle_pct = 63.0;
  double battery_low_fraction = 0.2;
};

struct ControllerConfig {
  FailsafeConfig failsafe;
  KinematicsConfig kinematics;
  PowerConfig power;
};

std::vector<std::string> validate(const ControllerConfig& cfg);

/// Constant wind; added to the ground velocity.
struct Wind {
  double east_mps = 0;
  double north_mps = 0;
};

enum class EventKind {
  ModeChange,
  WaypointReached,
  BatteryLow,
  BatteryExhausted,
  SteepTurn,
  CommLost,
  CommRestored,
  Landed,
  Crashed,
  CommandRejected,
};

std::string_view to_string(EventKind k);

struct Event {
  double t_s = 0;
  EventKind kind = EventKind::ModeChange;
  FlightMode from = FlightMode::Manual;
  FlightMode to = FlightMode::Manual;
  std::string reason;
  std::optional<std::size_t> waypoint;
  double value = 0;  // distance, battery mAh, or turn rate depending on kind
};

/// Initial state parked at home with a full usable battery.
UavState initial_state(const MissionPlan& plan, const ControllerConfig& cfg, double heading_deg = 0.0);

}  // namespace aqsim::mission
