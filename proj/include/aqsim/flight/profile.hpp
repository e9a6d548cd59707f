#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aqsim/flight/dynamics.hpp"

namespace aqsim::flight {

/// Everything the sizing report needs, loadable from a key/value profile file.
///
/// File format: one `key = value` per line, `#` starts a comment. Repeated keys
/// `partial_load` ("rpm throttle_pct current_a thrust_g run_time_min") and
/// `payload` ("grams name...") append rows. See config/stick60-paper.profile.
struct SizingProfile {
  std::string name = "unnamed";
  Environment env;
  AirplaneConfig airframe;
  PropulsionConfig propulsion;
  /// Rounded design weight. When absent the weight is mass * gravity.
  std::optional<double> design_weight_n;
  OperatingPoint point;
  std::vector<PartialLoadRow> partial_load;
  std::vector<PayloadItem> payload;
  double max_payload_g = 3000.0;
  double max_takeoff_mass_kg = 5.0;

  double weight_n() const { return design_weight_n.value_or(weight_force(airframe, env)); }
};

/// Built-in profile reproducing the Stick-60 worked design.
SizingProfile stick60_paper_profile();

/// Returns every problem found; empty means valid.
std::vector<std::string> validate(const SizingProfile& profile);

/// Parses profile text. Unknown keys and malformed values throw ParseError;
/// the result is not validated.
SizingProfile parse_profile(std::string_view text);

/// "stick60-paper" resolves to the built-in profile; anything else is a file path.
SizingProfile load_profile(const std::string& name_or_path);

struct SizingReport {
  std::string profile;
  double weight_n = 0;
  double takeoff_velocity_mps = 0;
  double reynolds = 0;
  double lift_coeff = 0;
  double motor_rpm = 0;
  double static_thrust_n = 0;
  ForceBalance balance;
  ThrustToWeight thrust_to_weight;
  /// Thrust-to-weight at the maximum take-off mass.
  ThrustToWeight max_mass_thrust_to_weight;
  PayloadBudget payload;
  std::vector<PartialLoadRow> partial_load;
};

/// Throws ValidationError listing every invalid field.
SizingReport make_sizing_report(const SizingProfile& profile);

void write_report(std::ostream& os, const SizingReport& report);

/// CSV in partial-load column order plus the model's run time for each row.
void write_flight_time_csv(std::ostream& os, const SizingReport& report, const PropulsionConfig& prop);

}  // namespace aqsim::flight
