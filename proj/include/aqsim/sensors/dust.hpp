#pragma once

#include <optional>

namespace aqsim::sensors {

/// Spec-sheet curve of the optical dust sensor: concentration from the
/// low-pulse-occupancy percentage (0..100).
double dust_concentration(double lpo_ratio_percent);

/// Inverse of dust_concentration on [0, 100] (the curve is strictly increasing there).
double dust_ratio_for_concentration(double concentration);

/// Accumulates low-pulse durations over a fixed sampling window.
class DustSampler {
 public:
  explicit DustSampler(double window_ms = 2000.0, double start_ms = 0.0);

  /// Adds one measured low pulse. When the window has elapsed at `now_ms`,
  /// returns the window's concentration and starts a new window.
  std::optional<double> update(double pulse_low_us, double now_ms);

  double accumulator_us() const { return lpo_us_; }
  double window_ms() const { return window_ms_; }
  double window_start_ms() const { return start_ms_; }

 private:
  double window_ms_;
  double start_ms_;
  double lpo_us_ = 0;
};

/// Removes the airflow-induced gain from a dust reading:
/// reading / (1 + coeff * airspeed). coeff = 0 disables the correction.
double airflow_adjust(double dust_reading, double airspeed_mps, double coeff);

}  // namespace aqsim::sensors
