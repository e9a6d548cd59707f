#include "aqsim/mission/types.hpp"

#include <array>

namespace aqsim::mission {

std::string_view to_string(FlightMode m) {
  switch (m) {
    case FlightMode::Manual: return "MANUAL";
    case FlightMode::AutoTakeoff: return "AUTO_TAKEOFF";
    case FlightMode::AutoMission: return "AUTO_MISSION";
    case FlightMode::ReturnToBase: return "RETURN_TO_BASE";
    case FlightMode::Loiter: return "LOITER";
  }
  return "?";
}

std::optional<FlightMode> parse_mode(std::string_view s) {
  for (auto m : {FlightMode::Manual, FlightMode::AutoTakeoff, FlightMode::AutoMission, FlightMode::ReturnToBase,
                 FlightMode::Loiter}) {
    if (to_string(m) == s) return m;
  }
  if (s == "RTB") return FlightMode::ReturnToBase;
  return std::nullopt;
}

bool transition_allowed(FlightMode from, FlightMode to) {
  using M = FlightMode;
  switch (from) {
    case M::Manual: return to == M::AutoTakeoff || to == M::AutoMission || to == M::ReturnToBase;
    case M::AutoTakeoff: return to == M::AutoMission || to == M::ReturnToBase || to == M::Manual;
    case M::AutoMission: return to == M::ReturnToBase || to == M::Manual;
    case M::ReturnToBase: return to == M::Loiter || to == M::Manual || to == M::AutoMission;
    case M::Loiter: return to == M::Manual || to == M::AutoMission;
  }
  return false;
}

std::string_view to_string(VehicleStatus s) {
  switch (s) {
    case VehicleStatus::OnGround: return "ON_GROUND";
    case VehicleStatus::Airborne: return "AIRBORNE";
    case VehicleStatus::Landed: return "LANDED";
    case VehicleStatus::Crashed: return "CRASHED";
  }
  return "?";
}

std::string_view to_string(EventKind k) {
  static constexpr std::array<std::string_view, 10> names{
      "MODE",   "WAYPOINT",      "BATTERY_LOW", "BATTERY_EXHAUSTED", "STEEP_TURN",
      "COMM_LOST", "COMM_RESTORED", "LANDED",      "CRASHED",           "REJECTED"};
  return names[static_cast<std::size_t>(k)];
}

std::vector<std::string> validate(const ControllerConfig& cfg) {
  std::vector<std::string> out;
  const auto& f = cfg.failsafe;
  if (!(f.comm_loss_timeout_s > 0)) out.emplace_back("comm_loss_timeout must be > 0");
  if (!(f.waypoint_radius_m > 0)) out.emplace_back("waypoint_radius must be > 0");
  if (!(f.takeoff_alt_m > 0)) out.emplace_back("takeoff_alt must be > 0");
  if (!(f.loiter_radius_m > 0)) out.emplace_back("loiter_radius must be > 0");
  const auto& k = cfg.kinematics;
  if (!(k.max_turn_rate_dps > 0)) out.emplace_back("max_turn_rate must be > 0");
  if (!(k.altitude_tau_s > 0)) out.emplace_back("altitude_tau must be > 0");
  if (!(k.max_climb_mps > 0) || !(k.max_sink_mps > 0)) out.emplace_back("climb/sink limits must be > 0");
  if (!(k.stabilization_tau_s > 0)) out.emplace_back("stabilization_tau must be > 0");
  if (cfg.power.partial_load.empty()) out.emplace_back("partial load table is empty");
  if (!(cfg.power.usable_capacity_mah > 0)) out.emplace_back("usable capacity must be > 0");
  return out;
}

UavState initial_state(const MissionPlan& plan, const ControllerConfig& cfg, double heading_deg) {
  UavState s;
  s.position = plan.home;
  s.position.alt = 0;
  s.heading_deg = heading_deg;
  s.battery_remaining_mah = cfg.power.usable_capacity_mah;
  s.manual = {heading_deg, 0.0, 0.0, 0.0};
  return s;
}

}  // namespace aqsim::mission
