#include "aqsim/sensors/registry.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "aqsim/common/error.hpp"
#include "aqsim/common/time.hpp"

namespace aqsim::sensors {

using nlohmann::json;

namespace {

// Arduino MQ135 library constants (PARA, PARB, RLOAD). Not calibrated for this build.
constexpr double kMq135A = 116.6020682;
constexpr double kMq135B = 2.769034857;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string window_label(double s) {
  if (s == kYearS) return "1y";
  if (std::fmod(s, 3600.0) == 0) return std::to_string(static_cast<long long>(s / 3600.0)) + "h";
  return std::to_string(static_cast<long long>(s)) + "s";
}

}  // namespace

CurveRegistry CurveRegistry::defaults() {
  CurveRegistry r;
  r.set({kLpgCurve, 5.0, 9.83, std::nullopt, false});
  r.set({kCoCurve, 5.0, 9.83, std::nullopt, false});
  r.set({kSmokeCurve, 5.0, 9.83, std::nullopt, false});
  r.set({kO3Curve, 100.0, 9.83, std::nullopt, false});
  r.set({power_law_curve(GasId::CO2, kMq135A, kMq135B), 10.0, 1.0, kMq135RZero, true});
  return r;
}

const CurveEntry& CurveRegistry::at(GasId gas) const {
  auto it = entries_.find(gas);
  if (it == entries_.end()) throw std::out_of_range("no curve registered for " + std::string(to_string(gas)));
  return it->second;
}

CurveRegistry CurveRegistry::from_json(std::string_view text) {
  CurveRegistry r;
  try {
    const auto doc = json::parse(text);
    for (const auto& c : doc.at("curves")) {
      const auto gas = parse_gas(c.at("gas").get<std::string>());
      if (!gas) throw ParseError("unknown gas '" + c.at("gas").get<std::string>() + "'", 0);
      CurveEntry e;
      e.curve = {*gas, c.at("p0").get<double>(), c.at("p1").get<double>(), c.at("p2").get<double>()};
      if (e.curve.p2 == 0) throw ValidationError({"curve slope p2 must be non-zero"});
      e.rl_kohm = c.value("rl_kohm", 5.0);
      e.clean_air_factor = c.value("clean_air_factor", 9.83);
      if (c.contains("rzero_kohm")) e.rzero_kohm = c.at("rzero_kohm").get<double>();
      e.provisional = c.value("provisional", false);
      if (!(e.rl_kohm > 0) || !(e.clean_air_factor > 0)) {
        throw ValidationError({"rl_kohm and clean_air_factor must be > 0"});
      }
      r.set(e);
    }
  } catch (const json::exception& ex) {
    throw ParseError(std::string("curve registry: ") + ex.what(), 0);
  }
  return r;
}

CurveRegistry CurveRegistry::load(const std::string& path) { return from_json(read_file(path)); }

std::string CurveRegistry::to_json() const {
  json curves = json::array();
  for (const auto& [gas, e] : entries_) {
    json c{{"gas", std::string(to_string(gas))}, {"p0", e.curve.p0}, {"p1", e.curve.p1}, {"p2", e.curve.p2},
           {"rl_kohm", e.rl_kohm}, {"clean_air_factor", e.clean_air_factor}, {"provisional", e.provisional}};
    if (e.rzero_kohm) c["rzero_kohm"] = *e.rzero_kohm;
    curves.push_back(std::move(c));
  }
  return json{{"curves", curves}}.dump(2);
}

std::vector<WhoLimit> parse_who_table(std::string_view text) {
  std::vector<WhoLimit> out;
  try {
    const auto doc = json::parse(text);
    for (const auto& l : doc.at("limits")) {
      const auto name = l.at("parameter").get<std::string>();
      const auto p = parse_parameter(name);
      if (!p) throw ParseError("unknown parameter '" + name + "'", 0);
      WhoLimit w{*p, l.at("limit").get<double>(), parse_duration_s(l.at("window").get<std::string>()),
                 l.value("unit", std::string(unit_of(*p)))};
      if (!(w.limit > 0)) throw ValidationError({"limit for " + name + " must be > 0"});
      out.push_back(std::move(w));
    }
  } catch (const json::exception& ex) {
    throw ParseError(std::string("WHO table: ") + ex.what(), 0);
  }
  return out;
}

std::vector<WhoLimit> load_who_table(const std::string& path) { return parse_who_table(read_file(path)); }

std::string who_table_to_json(const std::vector<WhoLimit>& limits) {
  json arr = json::array();
  for (const auto& l : limits) {
    arr.push_back({{"parameter", std::string(to_string(l.parameter))}, {"limit", l.limit},
                   {"window", window_label(l.window_s)}, {"unit", l.unit}});
  }
  return json{{"limits", arr}}.dump(2);
}

}  // namespace aqsim::sensors
