#include "aqsim/sensors/who.hpp"

#include <cmath>
#include <stdexcept>

namespace aqsim::sensors {

const std::vector<WhoLimit>& default_who_limits() {
  static const std::vector<WhoLimit> limits{
      {Parameter::O3, 0.0473, 8 * kHourS, "ppm"},    {Parameter::CO, 9.0, 8 * kHourS, "ppm"},
      {Parameter::CO, 35.0, 1 * kHourS, "ppm"},      {Parameter::CO2, 5000.0, 8 * kHourS, "ppm"},
      {Parameter::Dust, 25.0, 8 * kHourS, "ug/m3"},  {Parameter::Dust, 10.0, kYearS, "ug/m3"},
      {Parameter::LPG, 1000.0, kYearS, "ppm"},
  };
  return limits;
}

WhoVerdict who_check(Parameter parameter, double averaged_value, double window_s, std::span<const WhoLimit> limits) {
  for (const auto& l : limits) {
    if (l.parameter == parameter && std::abs(l.window_s - window_s) < 1e-6) {
      return {averaged_value > l.limit, l.limit};
    }
  }
  throw std::out_of_range("who_check: no limit for " + std::string(to_string(parameter)) + " over " +
                          std::to_string(window_s) + " s");
}

}  // namespace aqsim::sensors
