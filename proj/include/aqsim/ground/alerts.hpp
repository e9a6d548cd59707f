#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "aqsim/ground/store.hpp"
#include "aqsim/sensors/who.hpp"

namespace aqsim::ground {

struct AlertConfig {
  std::vector<sensors::WhoLimit> limits = sensors::default_who_limits();
  /// Dust readings are multiplied by this before comparison with the
  /// µg/m³ limits. Unvalidated; 1 keeps the curve units.
  double dust_factor = 1.0;
};

/// Rolling-average exceedance detection with one alert per episode. An
/// episode starts when the average of a (uav, parameter, window) rises above
/// its limit and ends when it falls back to or below it, or data runs out.
class AlertEngine {
 public:
  explicit AlertEngine(AlertConfig cfg = {});

  /// Alerts that begin a new episode at `now` for one UAV.
  std::vector<StoredAlert> scan(const MeasurementStore& store, const std::string& uav, Timestamp now);
  /// scan() for every UAV in the store.
  std::vector<StoredAlert> scan_all(const MeasurementStore& store, Timestamp now);

  bool in_episode(const std::string& uav, Parameter p, double window_s) const;
  const AlertConfig& config() const { return cfg_; }

 private:
  AlertConfig cfg_;
  std::map<std::tuple<std::string, Parameter, double>, bool> active_;
};

}  // namespace aqsim::ground
