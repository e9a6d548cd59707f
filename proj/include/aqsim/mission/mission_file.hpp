#pragma once

#include <string>
#include <string_view>

#include "aqsim/mission/types.hpp"

namespace aqsim::mission {

/// Mission file (JSON):
///   {"home": {"lat": .., "lon": .., "alt": 0},
///    "waypoints": [{"lat": .., "lon": .., "alt": 120}, ...],
///    "cruise_speed": 20, "cruise_alt": 120}
/// Unknown keys are ignored. Throws ParseError on malformed input.
MissionPlan mission_from_json(std::string_view text);
MissionPlan load_mission(const std::string& path);

/// Compact single-line JSON (safe to embed in a protocol line) unless indent >= 0.
std::string mission_to_json(const MissionPlan& plan, int indent = -1);

/// A valid rectangular survey around a fixed home point.
MissionPlan demo_mission();

}  // namespace aqsim::mission
