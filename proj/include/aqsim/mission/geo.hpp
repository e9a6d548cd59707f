#pragma once

namespace aqsim::mission {

inline constexpr double kEarthMeanRadiusM = 6371008.8;

struct Waypoint {
  double lat = 0;  // deg
  double lon = 0;  // deg
  double alt = 0;  // m above ground

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

bool valid_coordinates(const Waypoint& w);

/// Horizontal distance by the equirectangular approximation on the mean
/// Earth radius; under 0.1 % error for legs shorter than 30 km.
double distance_m(const Waypoint& a, const Waypoint& b);

/// Initial bearing from a to b, degrees clockwise from north in [0, 360).
double bearing_deg(const Waypoint& a, const Waypoint& b);

/// Moves `from` by a local east/north displacement in metres (altitude kept).
Waypoint offset_m(const Waypoint& from, double east_m, double north_m);

/// Wraps an angle to (-180, 180].
double wrap180(double deg);
/// Wraps an angle to [0, 360).
double wrap360(double deg);

}  // namespace aqsim::mission
