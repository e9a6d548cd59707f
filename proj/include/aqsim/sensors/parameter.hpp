#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace aqsim::sensors {

/// Measured quantities, in telemetry column order.
enum class Parameter : std::uint8_t { Humidity, Temperature, Dust, O3, CO2, CO, LPG, Smoke };

inline constexpr std::array<Parameter, 8> kAllParameters{Parameter::Humidity, Parameter::Temperature,
                                                         Parameter::Dust,     Parameter::O3,
                                                         Parameter::CO2,      Parameter::CO,
                                                         Parameter::LPG,      Parameter::Smoke};

std::string_view to_string(Parameter p);
std::optional<Parameter> parse_parameter(std::string_view name);
std::string_view unit_of(Parameter p);

/// One loop iteration of the sensor board: eight readings plus a validity
/// flag that stays false until every sensor has finished warming up.
struct SensorFrame {
  double humidity = 0;  // %RH
  double temp = 0;      // deg C
  double dust = 0;      // spec-sheet curve units
  double o3 = 0;        // ppm
  double co2 = 0;       // ppm
  double co = 0;        // ppm
  double lpg = 0;       // ppm
  double smoke = 0;     // ppm
  bool valid = true;

  double value(Parameter p) const;
  void set(Parameter p, double v);

  friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

}  // namespace aqsim::sensors
