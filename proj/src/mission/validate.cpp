#include "aqsim/mission/validate.hpp"

#include <cmath>

#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"

namespace aqsim::mission {

namespace {
// Degree-valued coordinates carry about a nanometre of rounding; a plan built
// at exactly the minimum distance must not be rejected for it.
constexpr double kDistanceSlackM = 1e-6;
}  // namespace

std::vector<Violation> validate_mission(const MissionPlan& plan) {
  if (plan.waypoints.empty()) throw ValidationError({"mission has no waypoints"});
  std::vector<Violation> out;
  if (!valid_coordinates(plan.home)) out.push_back({"invalid-coordinate", "home position is out of range", std::nullopt});
  for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
    if (!valid_coordinates(plan.waypoints[i])) {
      out.push_back({"invalid-coordinate", "waypoint " + std::to_string(i + 1) + " is out of range", i});
    }
  }
  if (!(plan.cruise_speed > 0) || !std::isfinite(plan.cruise_speed)) {
    out.push_back({"invalid-cruise-speed", "cruise speed must be > 0", std::nullopt});
  }
  if (!(plan.cruise_alt > 0) || !std::isfinite(plan.cruise_alt)) {
    out.push_back({"invalid-cruise-alt", "cruise altitude must be > 0", std::nullopt});
  }
  // Distances are meaningless with broken coordinates.
  if (!out.empty() && out.front().code == "invalid-coordinate") return out;

  const double first = distance_m(plan.home, plan.waypoints.front());
  if (first < kMinFirstWaypointDistanceM - kDistanceSlackM) {
    out.push_back({"first-waypoint-too-close",
                   "first waypoint is " + text::fixed(first, 1) + " m from home; keep at least 100 m", 0});
  }
  const double last = distance_m(plan.home, plan.waypoints.back());
  if (last < kMinLastWaypointDistanceM - kDistanceSlackM) {
    out.push_back({"last-waypoint-too-close",
                   "last waypoint is " + text::fixed(last, 1) + " m from home; keep at least 200 m",
                   plan.waypoints.size() - 1});
  }
  return out;
}

namespace {
std::string describe(const std::vector<Violation>& v) {
  std::string s = "mission rejected:";
  for (const auto& x : v) s += " [" + x.code + "] " + x.message + ";";
  return s;
}
}  // namespace

MissionRejected::MissionRejected(std::vector<Violation> v)
    : std::invalid_argument(describe(v)), violations_(std::move(v)) {}

ValidatedMission ValidatedMission::accept(MissionPlan plan) {
  auto v = validate_mission(plan);
  if (!v.empty()) throw MissionRejected(std::move(v));
  return ValidatedMission(std::move(plan));
}

}  // namespace aqsim::mission
