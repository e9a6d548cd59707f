#include "aqsim/mission/mission_file.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "aqsim/common/error.hpp"

namespace aqsim::mission {

using nlohmann::json;

namespace {

Waypoint wp_from(const json& j) { return {j.at("lat").get<double>(), j.at("lon").get<double>(), j.value("alt", 0.0)}; }
json wp_to(const Waypoint& w) { return {{"lat", w.lat}, {"lon", w.lon}, {"alt", w.alt}}; }

}  // namespace

MissionPlan mission_from_json(std::string_view text) {
  try {
    const auto doc = json::parse(text);
    MissionPlan p;
    p.home = wp_from(doc.at("home"));
    for (const auto& w : doc.at("waypoints")) p.waypoints.push_back(wp_from(w));
    p.cruise_speed = doc.value("cruise_speed", p.cruise_speed);
    p.cruise_alt = doc.value("cruise_alt", p.cruise_alt);
    return p;
  } catch (const json::parse_error& ex) {
    throw ParseError(std::string("mission: ") + ex.what(), ex.byte);
  } catch (const json::exception& ex) {
    throw ParseError(std::string("mission: ") + ex.what(), 0);
  }
}

MissionPlan load_mission(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mission '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return mission_from_json(ss.str());
}

std::string mission_to_json(const MissionPlan& plan, int indent) {
  json wps = json::array();
  for (const auto& w : plan.waypoints) wps.push_back(wp_to(w));
  json doc{{"home", wp_to(plan.home)}, {"waypoints", wps}, {"cruise_speed", plan.cruise_speed},
           {"cruise_alt", plan.cruise_alt}};
  return doc.dump(indent);
}

MissionPlan demo_mission() {
  MissionPlan p;
  p.home = {25.3300, 51.4300, 0.0};
  p.cruise_speed = 20.0;
  p.cruise_alt = 120.0;
  // (east, north) offsets in metres
  const double legs[][2] = {{100, 900}, {700, 1300}, {1300, 800}, {900, 250}};
  for (const auto& l : legs) {
    auto w = offset_m(p.home, l[0], l[1]);
    w.lat = std::round(w.lat * 1e6) / 1e6;
    w.lon = std::round(w.lon * 1e6) / 1e6;
    w.alt = 120.0;
    p.waypoints.push_back(w);
  }
  return p;
}

}  // namespace aqsim::mission
