#pragma once

#include <span>
#include <string>
#include <vector>

#include "aqsim/sensors/parameter.hpp"

namespace aqsim::sensors {

inline constexpr double kHourS = 3600.0;
inline constexpr double kYearS = 365.0 * 86400.0;

/// A permitted ambient concentration averaged over `window_s`.
struct WhoLimit {
  Parameter parameter = Parameter::CO;
  double limit = 0;
  double window_s = 0;
  std::string unit;
};

/// The WHO ambient limits used for alerting.
const std::vector<WhoLimit>& default_who_limits();

struct WhoVerdict {
  bool exceeded = false;
  double limit = 0;
};

/// Exceeded iff value > limit (a value exactly at the limit is ok). Throws
/// std::out_of_range when no limit is configured for (parameter, window).
WhoVerdict who_check(Parameter parameter, double averaged_value, double window_s,
                     std::span<const WhoLimit> limits = default_who_limits());

}  // namespace aqsim::sensors
