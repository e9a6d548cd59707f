#include "aqsim/flight/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "aqsim/common/error.hpp"

namespace aqsim::flight {

namespace {

// Empirical constants of the dynamic thrust fit (rpm, inches, m/s -> N).
constexpr double kThrustScale = 4.3294399e-8;
constexpr double kPitchSpeedScale = 4.3294399e-4;

void positive(std::vector<std::string>& out, const char* name, double v) {
  if (!(v > 0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be > 0");
}

}  // namespace

std::vector<std::string> validate(const Environment& env) {
  std::vector<std::string> out;
  positive(out, "air_density", env.air_density);
  positive(out, "kinematic_viscosity", env.kinematic_viscosity);
  positive(out, "gravity", env.gravity);
  return out;
}

std::vector<std::string> validate(const AirplaneConfig& cfg) {
  std::vector<std::string> out;
  positive(out, "mass_kg", cfg.mass_kg);
  positive(out, "wing_area_m2", cfg.wing_area_m2);
  if (cfg.reference_area_m2) positive(out, "reference_area_m2", *cfg.reference_area_m2);
  positive(out, "chord_m", cfg.chord_m);
  if (!(cfg.lift_coeff > 0 && cfg.lift_coeff <= 2)) out.emplace_back("lift_coeff must be in (0, 2]");
  if (!(cfg.drag_coeff >= 0)) out.emplace_back("drag_coeff must be >= 0");
  if (!(cfg.rolling_friction >= 0 && cfg.rolling_friction < 1)) out.emplace_back("rolling_friction must be in [0, 1)");
  return out;
}

std::vector<std::string> validate(const PropulsionConfig& prop) {
  std::vector<std::string> out;
  positive(out, "kv_rpm_per_volt", prop.kv_rpm_per_volt);
  positive(out, "voltage_v", prop.voltage_v);
  positive(out, "prop_diameter_in", prop.prop_diameter_in);
  positive(out, "prop_pitch_in", prop.prop_pitch_in);
  if (!(prop.motor_efficiency > 0 && prop.motor_efficiency <= 1)) out.emplace_back("motor_efficiency must be in (0, 1]");
  positive(out, "battery_capacity_mah", prop.battery_capacity_mah);
  if (!(prop.usable_fraction > 0 && prop.usable_fraction <= 1)) out.emplace_back("usable_fraction must be in (0, 1]");
  return out;
}

std::vector<std::string> validate(std::span<const PartialLoadRow> table) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (!(table[i].rpm > table[i - 1].rpm) || !(table[i].throttle_pct > table[i - 1].throttle_pct)) {
      out.push_back("partial load row " + std::to_string(i) + " is not strictly increasing in rpm and throttle");
    }
  }
  return out;
}

double weight_force(const AirplaneConfig& cfg, const Environment& env) { return cfg.mass_kg * env.gravity; }

double takeoff_velocity(double weight_n, const AirplaneConfig& cfg, const Environment& env) {
  const double denom = cfg.lift_coeff * cfg.wing_area_m2 * env.air_density;
  if (!(denom > 0)) throw DomainError("takeoff_velocity: Cl * A * rho must be positive");
  return std::sqrt(2.0 * weight_n / denom);
}

double takeoff_velocity(const AirplaneConfig& cfg, const Environment& env) {
  return takeoff_velocity(weight_force(cfg, env), cfg, env);
}

double lift_coefficient(double weight_n, const AirplaneConfig& cfg, const Environment& env, double v) {
  if (!(v > 0)) throw DomainError("lift_coefficient: speed must be positive");
  return weight_n / (0.5 * env.air_density * v * v * cfg.aero_area());
}

double lift_coefficient(const AirplaneConfig& cfg, const Environment& env, double v) {
  return lift_coefficient(weight_force(cfg, env), cfg, env, v);
}

double reynolds(const Environment& env, double v, double chord_m) { return v * chord_m / env.kinematic_viscosity; }

double motor_rpm(const PropulsionConfig& prop) { return prop.kv_rpm_per_volt * prop.voltage_v; }

double pitch_speed(const PropulsionConfig& prop, double rpm) { return kPitchSpeedScale * rpm * prop.prop_pitch_in; }

DynamicThrust dynamic_thrust(const PropulsionConfig& prop, double rpm, double v0) {
  if (rpm < 0) throw DomainError("dynamic_thrust: rpm must be >= 0");
  if (!(prop.prop_pitch_in > 0)) throw DomainError("dynamic_thrust: pitch must be positive");
  const double geometry = std::pow(prop.prop_diameter_in, 3.5) / std::sqrt(prop.prop_pitch_in);
  const double ft = kThrustScale * rpm * geometry * (pitch_speed(prop, rpm) - v0);
  if (ft < 0) return {0.0, true};
  return {ft, false};
}

double drag_force(const AirplaneConfig& cfg, const Environment& env, double v) {
  return 0.5 * cfg.drag_coeff * env.air_density * cfg.aero_area() * v * v;
}

double rolling_friction(const AirplaneConfig& cfg, double weight_n) { return cfg.rolling_friction * weight_n; }

ForceBalance net_force_accel_power(const AirplaneConfig& cfg, const Environment& env, const PropulsionConfig& prop,
                                   const OperatingPoint& op) {
  ForceBalance fb;
  const auto thrust = dynamic_thrust(prop, motor_rpm(prop), op.thrust_airspeed);
  fb.thrust_n = thrust.newtons;
  fb.thrust_clamped = thrust.clamped;
  fb.drag_n = drag_force(cfg, env, op.drag_airspeed);
  fb.friction_n = rolling_friction(cfg, op.weight_n.value_or(weight_force(cfg, env)));
  fb.net_force_n = fb.thrust_n - fb.drag_n - fb.friction_n;
  fb.accel_mps2 = fb.net_force_n / cfg.mass_kg;
  fb.mech_power_w = fb.net_force_n * op.power_speed;
  fb.elec_power_w = fb.mech_power_w / prop.motor_efficiency;
  return fb;
}

ForceBalance net_force_accel_power(const AirplaneConfig& cfg, const Environment& env, const PropulsionConfig& prop,
                                   double v) {
  if (v < 0) throw DomainError("net_force_accel_power: speed must be >= 0");
  return net_force_accel_power(cfg, env, prop, OperatingPoint{v, v, v, std::nullopt});
}

ThrustToWeight thrust_to_weight(double thrust_n, double weight_n) {
  if (!(weight_n > 0)) throw DomainError("thrust_to_weight: weight must be positive");
  const double r = thrust_n / weight_n;
  return {r, r >= 1.0};
}

double flight_time(const PropulsionConfig& prop, double current_a) {
  if (!(current_a > 0)) throw DomainError("flight_time: current draw must be positive");
  return 60.0 * (prop.battery_capacity_mah / 1000.0) * prop.usable_fraction / current_a;
}

PartialLoadRow partial_load_interpolate(std::span<const PartialLoadRow> table, double throttle_pct) {
  if (table.empty()) throw DomainError("partial_load_interpolate: empty table");
  const double t = std::clamp(throttle_pct, 0.0, 100.0);
  if (t <= table.front().throttle_pct) return table.front();
  if (t >= table.back().throttle_pct) return table.back();
  const auto hi = std::upper_bound(table.begin(), table.end(), t,
                                   [](double x, const PartialLoadRow& r) { return x < r.throttle_pct; });
  const auto lo = hi - 1;
  if (lo->throttle_pct == t) return *lo;
  const double f = (t - lo->throttle_pct) / (hi->throttle_pct - lo->throttle_pct);
  auto lerp = [f](double a, double b) { return a + f * (b - a); };
  return {lerp(lo->rpm, hi->rpm), t, lerp(lo->current_a, hi->current_a), lerp(lo->thrust_g, hi->thrust_g),
          lerp(lo->run_time_min, hi->run_time_min)};
}

double mixed_flight_time(const PropulsionConfig& prop, std::span<const PartialLoadRow> table,
                         std::span<const DutySegment> duty) {
  double weight = 0;
  double weighted_current = 0;
  for (const auto& seg : duty) {
    if (seg.weight < 0) throw DomainError("mixed_flight_time: negative duty weight");
    weight += seg.weight;
    weighted_current += seg.weight * partial_load_interpolate(table, seg.throttle_pct).current_a;
  }
  if (!(weight > 0)) throw DomainError("mixed_flight_time: duty cycle has no weight");
  return flight_time(prop, weighted_current / weight);
}

PayloadBudget payload_budget(std::span<const PayloadItem> items, double max_payload_g) {
  PayloadBudget b;
  for (const auto& it : items) {
    if (it.grams < 0) throw DomainError("payload_budget: negative weight for " + it.name);
    b.total_g += it.grams;
  }
  b.feasible = b.total_g <= max_payload_g;
  return b;
}

const std::vector<PartialLoadRow>& stick60_partial_load() {
  static const std::vector<PartialLoadRow> rows{
      {1600, 13, 0.4, 107, 827.7},   {2400, 20, 0.9, 241, 356.7},    {3200, 27, 1.8, 428, 178.7},
      {4000, 34, 3.2, 669, 99.9},    {4800, 41, 5.3, 963, 60.7},     {5600, 48, 8.2, 1311, 39.3},
      {6400, 55, 12.1, 1712, 26.8},  {7200, 63, 17.1, 2167, 19.0},   {8000, 70, 23.3, 2675, 13.9},
      {8800, 78, 31.0, 3237, 10.4},  {9600, 85, 40.3, 3853, 8.0},    {10400, 93, 51.5, 4521, 6.3},
      {11054, 100, 62.4, 5108, 5.2},
  };
  return rows;
}

const std::vector<PayloadItem>& stick60_payload() {
  static const std::vector<PayloadItem> items{
      {"Battery", 819},  {"Motor", 470},
      {"Sensors", 77.5}, {"Arduino", 5},
      {"Raspberry Pi", 45}, {"Webcam", 9},
      {"Flight controller + GPS", 50}, {"Power Bank", 280},
      {"Others", 100},
  };
  return items;
}

}  // namespace aqsim::flight
