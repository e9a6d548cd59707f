#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "aqsim/mission/types.hpp"
#include "aqsim/mission/validate.hpp"

namespace aqsim::mission {

/// Raised for operations that the vehicle's current state does not permit.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct StepResult {
  UavState state;
  std::vector<Event> events;
};

/// Advances the point-mass model by dt seconds (0 < dt <= 1) and runs the
/// mode logic. AUTO modes need `mission`. Throws StateError once the vehicle
/// has landed or crashed.
StepResult step(const UavState& state, const ValidatedMission* mission, const ControllerConfig& cfg, double dt,
                Wind wind = {});

/// Horizontal distance <= radius, inclusive.
bool waypoint_reached(const Waypoint& position, const Waypoint& wp, double radius_m);

/// Feeds one link-health observation taken at `now_s`. An AUTO mode that has
/// been without link for at least the timeout switches to RETURN_TO_BASE;
/// restoring the link never restores the previous mode.
UavState on_comm_status(const UavState& state, const FailsafeConfig& cfg, bool link_ok, double now_s,
                        std::vector<Event>* events = nullptr);

/// Operator mode request. MANUAL is always granted. AUTO modes need a
/// validated mission (StateError otherwise); LOITER cannot be requested.
/// AUTO_MISSION resumes at the first unvisited waypoint, or restarts the
/// route when every waypoint has been visited.
UavState manual_override(const UavState& state, FlightMode requested, const ValidatedMission* mission,
                         std::vector<Event>* events = nullptr);

/// Adds a disturbance to the attitude error and lets the stabiliser decay it
/// for dt seconds: error *= exp(-dt / tau).
UavState stabilize(const UavState& state, double disturbance_deg, double dt, double tau_s = 0.3);

}  // namespace aqsim::mission
