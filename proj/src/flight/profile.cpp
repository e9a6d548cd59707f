#include "aqsim/flight/profile.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"

namespace aqsim::flight {

SizingProfile stick60_paper_profile() {
  SizingProfile p;
  p.name = "stick60-paper";
  p.airframe.mass_kg = 4.0;
  p.design_weight_n = 40.0;
  p.airframe.wing_area_m2 = 0.64;
  p.airframe.reference_area_m2 = 0.63;
  p.airframe.chord_m = 0.3;
  p.airframe.lift_coeff = 1.0;
  p.airframe.drag_coeff = 0.02;
  p.airframe.rolling_friction = 0.005;
  p.propulsion = PropulsionConfig{560.0, 22.2, 14.0, 6.0, 0.92, 6000.0, 0.9};
  p.point = OperatingPoint{10.1, 10.26, 12.25, std::nullopt};
  p.partial_load = stick60_partial_load();
  p.payload = stick60_payload();
  return p;
}

std::vector<std::string> validate(const SizingProfile& p) {
  std::vector<std::string> out = validate(p.env);
  for (auto& s : validate(p.airframe)) out.push_back(std::move(s));
  for (auto& s : validate(p.propulsion)) out.push_back(std::move(s));
  for (auto& s : validate(std::span<const PartialLoadRow>(p.partial_load))) out.push_back(std::move(s));
  if (p.design_weight_n && !(*p.design_weight_n > 0)) out.emplace_back("design_weight_n must be > 0");
  if (p.point.thrust_airspeed < 0) out.emplace_back("point.thrust_airspeed_mps must be >= 0");
  if (p.point.drag_airspeed < 0) out.emplace_back("point.drag_airspeed_mps must be >= 0");
  if (p.point.power_speed < 0) out.emplace_back("point.power_speed_mps must be >= 0");
  if (p.partial_load.empty()) out.emplace_back("partial_load table is empty");
  for (const auto& row : p.partial_load) {
    if (!(row.current_a > 0)) {
      out.emplace_back("partial_load current must be > 0");
      break;
    }
  }
  for (const auto& item : p.payload) {
    if (item.grams < 0) out.push_back("payload '" + item.name + "' has negative weight");
  }
  if (!(p.max_payload_g > 0)) out.emplace_back("payload.max_g must be > 0");
  if (!(p.max_takeoff_mass_kg > 0)) out.emplace_back("airframe.max_takeoff_mass_kg must be > 0");
  return out;
}

SizingProfile parse_profile(std::string_view text) {
  SizingProfile p;
  p.airframe.reference_area_m2.reset();

  using Setter = std::function<void(double)>;
  const std::map<std::string, Setter, std::less<>> scalars{
      {"env.air_density", [&](double v) { p.env.air_density = v; }},
      {"env.kinematic_viscosity", [&](double v) { p.env.kinematic_viscosity = v; }},
      {"env.gravity", [&](double v) { p.env.gravity = v; }},
      {"airframe.mass_kg", [&](double v) { p.airframe.mass_kg = v; }},
      {"airframe.design_weight_n", [&](double v) { p.design_weight_n = v; }},
      {"airframe.wing_area_m2", [&](double v) { p.airframe.wing_area_m2 = v; }},
      {"airframe.reference_area_m2", [&](double v) { p.airframe.reference_area_m2 = v; }},
      {"airframe.chord_m", [&](double v) { p.airframe.chord_m = v; }},
      {"airframe.lift_coeff", [&](double v) { p.airframe.lift_coeff = v; }},
      {"airframe.drag_coeff", [&](double v) { p.airframe.drag_coeff = v; }},
      {"airframe.rolling_friction", [&](double v) { p.airframe.rolling_friction = v; }},
      {"airframe.max_takeoff_mass_kg", [&](double v) { p.max_takeoff_mass_kg = v; }},
      {"prop.kv_rpm_per_volt", [&](double v) { p.propulsion.kv_rpm_per_volt = v; }},
      {"prop.voltage_v", [&](double v) { p.propulsion.voltage_v = v; }},
      {"prop.diameter_in", [&](double v) { p.propulsion.prop_diameter_in = v; }},
      {"prop.pitch_in", [&](double v) { p.propulsion.prop_pitch_in = v; }},
      {"prop.motor_efficiency", [&](double v) { p.propulsion.motor_efficiency = v; }},
      {"battery.capacity_mah", [&](double v) { p.propulsion.battery_capacity_mah = v; }},
      {"battery.usable_fraction", [&](double v) { p.propulsion.usable_fraction = v; }},
      {"point.thrust_airspeed_mps", [&](double v) { p.point.thrust_airspeed = v; }},
      {"point.drag_airspeed_mps", [&](double v) { p.point.drag_airspeed = v; }},
      {"point.power_speed_mps", [&](double v) { p.point.power_speed = v; }},
      {"payload.max_g", [&](double v) { p.max_payload_g = v; }},
  };

  std::size_t offset = 0;
  for (auto raw : text::split(text, '\n')) {
    const std::size_t line_offset = offset;
    offset += raw.size() + 1;
    auto line = raw.substr(0, raw.find('#'));
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_offset);
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));

    if (key == "name") {
      p.name = std::string(value);
    } else if (key == "partial_load") {
      const auto f = text::split_ws(value);
      if (f.size() != 5) throw ParseError("partial_load needs 5 numbers", line_offset);
      double v[5];
      for (int i = 0; i < 5; ++i) {
        auto d = text::to_double(f[i]);
        if (!d) throw ParseError("partial_load: non-numeric field", line_offset);
        v[i] = *d;
      }
      p.partial_load.push_back({v[0], v[1], v[2], v[3], v[4]});
    } else if (key == "payload") {
      const auto sp = value.find_first_of(" \t");
      if (sp == std::string_view::npos) throw ParseError("payload needs 'grams name'", line_offset);
      auto g = text::to_double(value.substr(0, sp));
      if (!g) throw ParseError("payload: non-numeric weight", line_offset);
      p.payload.push_back({std::string(text::trim(value.substr(sp))), *g});
    } else if (auto it = scalars.find(key); it != scalars.end()) {
      auto d = text::to_double(value);
      if (!d) throw ParseError("non-numeric value for " + std::string(key), line_offset);
      it->second(*d);
    } else {
      throw ParseError("unknown key '" + std::string(key) + "'", line_offset);
    }
  }
  return p;
}

SizingProfile load_profile(const std::string& name_or_path) {
  if (name_or_path == "stick60-paper") return stick60_paper_profile();
  std::ifstream in(name_or_path);
  if (!in) throw std::runtime_error("cannot open profile '" + name_or_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_profile(ss.str());
}

SizingReport make_sizing_report(const SizingProfile& p) {
  if (auto problems = validate(p); !problems.empty()) throw ValidationError(std::move(problems));

  SizingReport r;
  r.profile = p.name;
  r.weight_n = p.weight_n();
  r.takeoff_velocity_mps = takeoff_velocity(r.weight_n, p.airframe, p.env);
  r.reynolds = reynolds(p.env, p.point.thrust_airspeed, p.airframe.chord_m);
  r.lift_coeff = p.point.thrust_airspeed > 0
                     ? lift_coefficient(r.weight_n, p.airframe, p.env, p.point.thrust_airspeed)
                     : 0.0;
  r.motor_rpm = motor_rpm(p.propulsion);
  r.static_thrust_n = dynamic_thrust(p.propulsion, r.motor_rpm, 0.0).newtons;
  OperatingPoint op = p.point;
  op.weight_n = r.weight_n;
  r.balance = net_force_accel_power(p.airframe, p.env, p.propulsion, op);
  r.thrust_to_weight = thrust_to_weight(r.balance.thrust_n, r.weight_n);
  r.max_mass_thrust_to_weight = thrust_to_weight(r.balance.thrust_n, p.max_takeoff_mass_kg * p.env.gravity);
  r.payload = payload_budget(p.payload, p.max_payload_g);
  r.partial_load = p.partial_load;
  return r;
}

namespace {

void kv(std::ostream& os, const char* key, double v, int decimals) { os << key << ": " << text::fixed(v, decimals) << '\n'; }

}  // namespace

void write_report(std::ostream& os, const SizingReport& r) {
  os << "profile: " << r.profile << '\n';
  kv(os, "weight_n", r.weight_n, 3);
  kv(os, "takeoff_velocity_mps", r.takeoff_velocity_mps, 3);
  kv(os, "reynolds", r.reynolds, 0);
  kv(os, "lift_coeff", r.lift_coeff, 4);
  kv(os, "motor_rpm", r.motor_rpm, 1);
  kv(os, "static_thrust_n", r.static_thrust_n, 3);
  kv(os, "thrust_n", r.balance.thrust_n, 3);
  if (r.balance.thrust_clamped) os << "thrust_clamped: true\n";
  kv(os, "drag_n", r.balance.drag_n, 4);
  kv(os, "friction_n", r.balance.friction_n, 4);
  kv(os, "net_force_n", r.balance.net_force_n, 3);
  kv(os, "accel_mps2", r.balance.accel_mps2, 3);
  kv(os, "mech_power_w", r.balance.mech_power_w, 1);
  kv(os, "elec_power_w", r.balance.elec_power_w, 1);
  kv(os, "thrust_to_weight", r.thrust_to_weight.ratio, 3);
  os << "thrust_to_weight_feasible: " << (r.thrust_to_weight.feasible ? "true" : "false") << '\n';
  kv(os, "max_mass_thrust_to_weight", r.max_mass_thrust_to_weight.ratio, 3);
  kv(os, "payload_total_g", r.payload.total_g, 1);
  os << "payload_feasible: " << (r.payload.feasible ? "true" : "false") << '\n';
}

void write_flight_time_csv(std::ostream& os, const SizingReport& r, const PropulsionConfig& prop) {
  os << "rpm,throttle_pct,current_a,thrust_g,run_time_min,model_run_time_min\n";
  for (const auto& row : r.partial_load) {
    os << text::fixed(row.rpm, 0) << ',' << text::fixed(row.throttle_pct, 0) << ',' << text::fixed(row.current_a, 1)
       << ',' << text::fixed(row.thrust_g, 0) << ',' << text::fixed(row.run_time_min, 1) << ','
       << text::fixed(flight_time(prop, row.current_a), 1) << '\n';
  }
}

}  // namespace aqsim::flight
