#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aqsim/sensors/gas.hpp"
#include "aqsim/sensors/who.hpp"

namespace aqsim::sensors {

struct CurveEntry {
  GasCurve curve;
  double rl_kohm = 5.0;
  double clean_air_factor = 9.83;
  /// MQ-135 style sensors reference a calibrated RZERO instead of a clean-air factor.
  std::optional<double> rzero_kohm;
  /// Coefficients not backed by the sensor firmware (placeholders awaiting calibration).
  bool provisional = false;
};

/// gas -> curve and divider parameters.
///
/// JSON schema:
///   {"curves": [{"gas": "CO", "p0": 2.3, "p1": 0.72, "p2": -0.34,
///                "rl_kohm": 5, "clean_air_factor": 9.83,
///                "rzero_kohm": 206.85, "provisional": false}, ...]}
/// `rzero_kohm` and `provisional` are optional.
class CurveRegistry {
 public:
  /// Firmware curves for LPG, CO, smoke and O3, plus a provisional MQ-135
  /// CO2 curve taken from the common Arduino MQ135 library.
  static CurveRegistry defaults();
  static CurveRegistry from_json(std::string_view json_text);
  static CurveRegistry load(const std::string& path);

  void set(const CurveEntry& entry) { entries_[entry.curve.gas] = entry; }
  bool contains(GasId gas) const { return entries_.count(gas) != 0; }
  /// Throws std::out_of_range for an unregistered gas.
  const CurveEntry& at(GasId gas) const;
  std::string to_json() const;

 private:
  std::map<GasId, CurveEntry> entries_;
};

/// WHO limit table file: {"limits": [{"parameter": "co", "limit": 35,
/// "window": "1h", "unit": "ppm"}, ...]}. Windows use parse_duration_s syntax.
std::vector<WhoLimit> parse_who_table(std::string_view json_text);
std::vector<WhoLimit> load_who_table(const std::string& path);
std::string who_table_to_json(const std::vector<WhoLimit>& limits);

}  // namespace aqsim::sensors
