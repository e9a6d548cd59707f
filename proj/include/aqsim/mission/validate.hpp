#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "aqsim/mission/types.hpp"

namespace aqsim::mission {

inline constexpr double kMinFirstWaypointDistanceM = 100.0;
inline constexpr double kMinLastWaypointDistanceM = 200.0;

struct Violation {
  std::string code;
  std::string message;
  std::optional<std::size_t> waypoint;
};

/// Geometry and invariant checks for a plan. Empty result means the plan is
/// flyable. Throws ValidationError when the plan has no waypoints.
///
/// Codes: first-waypoint-too-close, last-waypoint-too-close,
/// invalid-coordinate, invalid-cruise-speed, invalid-cruise-alt.
std::vector<Violation> validate_mission(const MissionPlan& plan);

class MissionRejected : public std::invalid_argument {
 public:
  explicit MissionRejected(std::vector<Violation> v);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// A plan that passed validate_mission. Only obtainable through accept().
class ValidatedMission {
 public:
  /// Throws MissionRejected when the plan has violations.
  static ValidatedMission accept(MissionPlan plan);

  const MissionPlan& plan() const { return plan_; }
  const Waypoint& home() const { return plan_.home; }
  const std::vector<Waypoint>& waypoints() const { return plan_.waypoints; }

 private:
  explicit ValidatedMission(MissionPlan plan) : plan_(std::move(plan)) {}
  MissionPlan plan_;
};

}  // namespace aqsim::mission
