#include "aqsim/mission/geo.hpp"

#include <cmath>
#include <numbers>

namespace aqsim::mission {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

bool valid_coordinates(const Waypoint& w) {
  return std::isfinite(w.lat) && std::isfinite(w.lon) && std::isfinite(w.alt) && std::abs(w.lat) <= 90.0 &&
         std::abs(w.lon) <= 180.0 && w.alt >= 0.0;
}

double distance_m(const Waypoint& a, const Waypoint& b) {
  const double mean_lat = 0.5 * (a.lat + b.lat) * kDeg;
  const double x = wrap180(b.lon - a.lon) * kDeg * std::cos(mean_lat);
  const double y = (b.lat - a.lat) * kDeg;
  return kEarthMeanRadiusM * std::sqrt(x * x + y * y);
}

double bearing_deg(const Waypoint& a, const Waypoint& b) {
  const double mean_lat = 0.5 * (a.lat + b.lat) * kDeg;
  const double east = wrap180(b.lon - a.lon) * std::cos(mean_lat);
  const double north = b.lat - a.lat;
  if (east == 0.0 && north == 0.0) return 0.0;
  return wrap360(std::atan2(east, north) / kDeg);
}

Waypoint offset_m(const Waypoint& from, double east_m, double north_m) {
  Waypoint w = from;
  w.lat = from.lat + north_m / kEarthMeanRadiusM / kDeg;
  const double mean_lat = 0.5 * (from.lat + w.lat) * kDeg;
  w.lon = from.lon + east_m / (kEarthMeanRadiusM * std::cos(mean_lat)) / kDeg;
  return w;
}

double wrap180(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

double wrap360(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0) d += 360.0;
  if (d >= 360.0) d -= 360.0;
  return d;
}

}  // namespace aqsim::mission
