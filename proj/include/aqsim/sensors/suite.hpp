#pragma once

#include <cstdint>

#include "aqsim/common/random.hpp"
#include "aqsim/sensors/dust.hpp"
#include "aqsim/sensors/gas.hpp"
#include "aqsim/sensors/parameter.hpp"
#include "aqsim/sensors/registry.hpp"

namespace aqsim::sensors {

/// True conditions around the airframe at one instant.
struct AmbientAir {
  double humidity_pct = 41.4;
  double temp_c = 23.4;
  double dust = 0.0;  // spec-sheet curve units
  double o3_ppm = 0.02;
  double co2_ppm = 410.0;
  double co_ppm = 1.0;
};

struct SensorSuiteConfig {
  CurveRegistry curves = CurveRegistry::defaults();
  CalibrationParams calibration;
  /// Actual clean-air reference resistances of the simulated parts; the
  /// suite only learns them through calibration.
  double mq2_true_ro_kohm = 10.0;
  double mq131_true_ro_kohm = 10.0;
  double mq135_rzero_kohm = kMq135RZero;
  /// Warm-up on the simulated clock (real parts need about a day of burn-in).
  double mq_warmup_s = 30.0;
  double dust_warmup_s = 60.0;
  double dust_window_ms = 2000.0;
  /// How strongly airflow inflates the raw dust channel (per m/s).
  double airflow_gain = 0.02;
  /// Correction coefficient passed to airflow_adjust; 0 leaves readings raw.
  double airflow_coeff = 0.0;
  double adc_noise_lsb = 0.5;
  PpmOptions ppm;
};

struct SensorSuiteState {
  double ro_mq2_kohm = 0;
  double ro_mq131_kohm = 0;
  double warm_up_remaining_s = 0;
  SensorFrame last_reading;
};

/// Simulated sensor board: turns true concentrations into ADC codes and pulse
/// trains, then runs them through the same read path as the firmware.
///
/// The MQ-2 channel is driven by the CO concentration; LPG and smoke are the
/// same resistance read through their own curves.
class SensorSuite {
 public:
  SensorSuite(SensorSuiteConfig config, std::uint64_t seed, double power_on_s = 0.0);

  /// Clean-air calibration of the MQ-2 and MQ-131 channels.
  void calibrate();
  bool calibrated() const { return calibrated_; }

  SensorFrame read(const AmbientAir& air, double airspeed_mps, double now_s);

  const SensorSuiteState& state() const { return state_; }
  const SensorSuiteConfig& config() const { return config_; }

 private:
  int sample_adc(double rs_kohm, double rl_kohm);
  double mean_resistance(double rs_kohm, double rl_kohm, int samples);

  SensorSuiteConfig config_;
  Rng rng_;
  double power_on_s_;
  bool calibrated_ = false;
  DustSampler dust_;
  double last_read_ms_;
  double dust_value_;
  SensorSuiteState state_;
};

}  // namespace aqsim::sensors
