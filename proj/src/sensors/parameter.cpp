#include "aqsim/sensors/parameter.hpp"

namespace aqsim::sensors {

namespace {
constexpr std::array<std::string_view, 8> kNames{"humidity", "temp", "dust", "o3", "co2", "co", "lpg", "smoke"};
constexpr std::array<std::string_view, 8> kUnits{"%RH", "degC", "ug/m3", "ppm", "ppm", "ppm", "ppm", "ppm"};
}  // namespace

std::string_view to_string(Parameter p) { return kNames[static_cast<std::size_t>(p)]; }
std::string_view unit_of(Parameter p) { return kUnits[static_cast<std::size_t>(p)]; }

std::optional<Parameter> parse_parameter(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Parameter>(i);
  }
  if (name == "temperature") return Parameter::Temperature;
  return std::nullopt;
}

double SensorFrame::value(Parameter p) const {
  switch (p) {
    case Parameter::Humidity: return humidity;
    case Parameter::Temperature: return temp;
    case Parameter::Dust: return dust;
    case Parameter::O3: return o3;
    case Parameter::CO2: return co2;
    case Parameter::CO: return co;
    case Parameter::LPG: return lpg;
    case Parameter::Smoke: return smoke;
  }
  return 0;
}

void SensorFrame::set(Parameter p, double v) {
  switch (p) {
    case Parameter::Humidity: humidity = v; break;
    case Parameter::Temperature: temp = v; break;
    case Parameter::Dust: dust = v; break;
    case Parameter::O3: o3 = v; break;
    case Parameter::CO2: co2 = v; break;
    case Parameter::CO: co = v; break;
    case Parameter::LPG: lpg = v; break;
    case Parameter::Smoke: smoke = v; break;
  }
}

}  // namespace aqsim::sensors
