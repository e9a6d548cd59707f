#pragma once

// Point-mass airframe and propulsion relations for a small fixed-wing UAV.
//
// Units are SI except where a field name says otherwise: propeller diameter and
// pitch are in inches (the empirical thrust constant is fitted to them) and
// battery capacity is in mAh.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aqsim::flight {

struct Environment {
  double air_density = 1.225;           // kg/m^3
  double kinematic_viscosity = 1.5111e-5;  // m^2/s
  double gravity = 9.81;                // m/s^2
};

struct AirplaneConfig {
  double mass_kg = 4.0;
  double wing_area_m2 = 0.64;
  /// Area used for drag and for the lift-coefficient check. Defaults to wing_area_m2.
  std::optional<double> reference_area_m2;
  double chord_m = 0.3;
  double lift_coeff = 1.0;
  double drag_coeff = 0.02;
  double rolling_friction = 0.005;

  double aero_area() const { return reference_area_m2.value_or(wing_area_m2); }
};

struct PropulsionConfig {
  double kv_rpm_per_volt = 560.0;
  double voltage_v = 22.2;
  double prop_diameter_in = 14.0;
  double prop_pitch_in = 6.0;
  double motor_efficiency = 0.92;
  double battery_capacity_mah = 6000.0;
  double usable_fraction = 0.9;

  double usable_capacity_mah() const { return battery_capacity_mah * usable_fraction; }
};

/// One row of a motor partial-load table.
struct PartialLoadRow {
  double rpm = 0;
  double throttle_pct = 0;
  double current_a = 0;
  double thrust_g = 0;
  double run_time_min = 0;
};

std::vector<std::string> validate(const Environment& env);
std::vector<std::string> validate(const AirplaneConfig& cfg);
std::vector<std::string> validate(const PropulsionConfig& prop);
std::vector<std::string> validate(std::span<const PartialLoadRow> table);

double weight_force(const AirplaneConfig& cfg, const Environment& env);

/// Speed at which lift equals `weight_n`: sqrt(2 W / (Cl A rho)), A = wing area.
double takeoff_velocity(double weight_n, const AirplaneConfig& cfg, const Environment& env);
double takeoff_velocity(const AirplaneConfig& cfg, const Environment& env);

/// Lift coefficient needed to carry `weight_n` at speed v over the reference area.
double lift_coefficient(double weight_n, const AirplaneConfig& cfg, const Environment& env, double v);
double lift_coefficient(const AirplaneConfig& cfg, const Environment& env, double v);

double reynolds(const Environment& env, double v, double chord_m);

double motor_rpm(const PropulsionConfig& prop);

struct DynamicThrust {
  double newtons = 0;
  /// Set when the empirical formula went negative (v0 past the pitch speed) and was clamped to zero.
  bool clamped = false;
};

/// Empirical propeller thrust at forward speed v0 (static thrust when v0 = 0).
DynamicThrust dynamic_thrust(const PropulsionConfig& prop, double rpm, double v0);

/// Forward speed at which dynamic thrust reaches zero.
double pitch_speed(const PropulsionConfig& prop, double rpm);

double drag_force(const AirplaneConfig& cfg, const Environment& env, double v);
double rolling_friction(const AirplaneConfig& cfg, double weight_n);

struct ForceBalance {
  double thrust_n = 0;
  double drag_n = 0;
  double friction_n = 0;
  double net_force_n = 0;
  double accel_mps2 = 0;
  double mech_power_w = 0;
  double elec_power_w = 0;
  bool thrust_clamped = false;
};

/// The speeds at which each term of the force balance is evaluated. The
/// single-speed overload of net_force_accel_power uses the same v for all
/// three; worked design examples frequently do not.
struct OperatingPoint {
  double thrust_airspeed = 0;
  double drag_airspeed = 0;
  double power_speed = 0;
  std::optional<double> weight_n;  // overrides m*g for the friction term
};

ForceBalance net_force_accel_power(const AirplaneConfig& cfg, const Environment& env,
                                   const PropulsionConfig& prop, double v);
ForceBalance net_force_accel_power(const AirplaneConfig& cfg, const Environment& env,
                                   const PropulsionConfig& prop, const OperatingPoint& op);

struct ThrustToWeight {
  double ratio = 0;
  bool feasible = false;
};

ThrustToWeight thrust_to_weight(double thrust_n, double weight_n);

/// Minutes of run time on the usable part of the battery at a constant draw.
double flight_time(const PropulsionConfig& prop, double current_a);

PartialLoadRow partial_load_interpolate(std::span<const PartialLoadRow> table, double throttle_pct);

struct DutySegment {
  double throttle_pct = 0;
  double weight = 0;  // relative share of flight time spent at this throttle
};

/// Flight time for a user-supplied throttle mix: the battery drains at the
/// time-weighted mean current of the segments.
double mixed_flight_time(const PropulsionConfig& prop, std::span<const PartialLoadRow> table,
                         std::span<const DutySegment> duty);

struct PayloadItem {
  std::string name;
  double grams = 0;
};

struct PayloadBudget {
  double total_g = 0;
  bool feasible = true;
};

PayloadBudget payload_budget(std::span<const PayloadItem> items, double max_payload_g);

/// Motor partial-load table for the stock Stick-60 drive (14x6 prop, 6S 6000 mAh).
const std::vector<PartialLoadRow>& stick60_partial_load();

/// On-board component weights of the air-quality payload build.
const std::vector<PayloadItem>& stick60_payload();

}  // namespace aqsim::flight
