#include "aqsim/sensors/suite.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "aqsim/common/error.hpp"

namespace aqsim::sensors {

namespace {
double round_to(double v, double step) { return std::round(v / step) * step; }
}  // namespace

SensorSuite::SensorSuite(SensorSuiteConfig config, std::uint64_t seed, double power_on_s)
    : config_(std::move(config)),
      rng_(seed),
      power_on_s_(power_on_s),
      dust_(config_.dust_window_ms, power_on_s * 1000.0),
      last_read_ms_(power_on_s * 1000.0),
      dust_value_(dust_concentration(0.0)) {
  state_.warm_up_remaining_s = std::max(config_.mq_warmup_s, config_.dust_warmup_s);
}

int SensorSuite::sample_adc(double rs_kohm, double rl_kohm) {
  const double code = adc_for_resistance(rs_kohm, rl_kohm) + config_.adc_noise_lsb * rng_.normal();
  // A saturated 1023 would read as zero resistance; real boards never quite get there.
  return std::clamp(static_cast<int>(std::lround(code)), 1, kAdcMax - 1);
}

double SensorSuite::mean_resistance(double rs_kohm, double rl_kohm, int samples) {
  double sum = 0;
  for (int i = 0; i < samples; ++i) sum += mq_resistance(sample_adc(rs_kohm, rl_kohm), rl_kohm);
  return sum / samples;
}

void SensorSuite::calibrate() {
  const auto& p = config_.calibration;
  auto run = [&](double true_ro, GasId gas) {
    const auto& entry = config_.curves.at(gas);
    std::vector<int> samples;
    samples.reserve(static_cast<std::size_t>(p.sample_count));
    for (int i = 0; i < p.sample_count; ++i) {
      samples.push_back(sample_adc(true_ro * entry.clean_air_factor, entry.rl_kohm));
    }
    CalibrationParams cp = p;
    cp.rl_kohm = entry.rl_kohm;
    cp.clean_air_factor = entry.clean_air_factor;
    return mq_calibrate(samples, cp);
  };
  state_.ro_mq2_kohm = run(config_.mq2_true_ro_kohm, GasId::CO);
  state_.ro_mq131_kohm = run(config_.mq131_true_ro_kohm, GasId::O3);
  calibrated_ = true;
}

SensorFrame SensorSuite::read(const AmbientAir& air, double airspeed_mps, double now_s) {
  if (!calibrated_) throw std::logic_error("SensorSuite::read before calibrate()");
  const int reads = config_.calibration.read_sample_count;
  SensorFrame f;
  f.humidity = round_to(air.humidity_pct, 0.1);
  f.temp = round_to(air.temp_c, 0.1);

  const auto& co = config_.curves.at(GasId::CO);
  const double rs2 = mean_resistance(curve_forward(std::max(air.co_ppm, 1e-6), co.curve) * config_.mq2_true_ro_kohm,
                                     co.rl_kohm, reads);
  const double ratio2 = rs2 / state_.ro_mq2_kohm;
  f.co = gas_ppm(ratio2, co.curve, config_.ppm);
  f.lpg = gas_ppm(ratio2, config_.curves.at(GasId::LPG).curve, config_.ppm);
  f.smoke = gas_ppm(ratio2, config_.curves.at(GasId::Smoke).curve, config_.ppm);

  const auto& o3 = config_.curves.at(GasId::O3);
  const double rs131 = mean_resistance(
      curve_forward(std::max(air.o3_ppm, 1e-6), o3.curve) * config_.mq131_true_ro_kohm, o3.rl_kohm, reads);
  f.o3 = gas_ppm(rs131 / state_.ro_mq131_kohm, o3.curve, config_.ppm);

  const auto& co2 = config_.curves.at(GasId::CO2);
  const double rzero = co2.rzero_kohm.value_or(config_.mq135_rzero_kohm);
  const double rs135 = curve_forward(std::max(air.co2_ppm, 1e-6), co2.curve) * rzero;
  f.co2 = mq135_co2_ppm(sample_adc(rs135, co2.rl_kohm), rzero, co2.curve, co2.rl_kohm);

  // Dust: the low-pulse share of the time since the previous read.
  const double now_ms = now_s * 1000.0;
  const double elapsed_ms = std::max(0.0, now_ms - last_read_ms_);
  last_read_ms_ = now_ms;
  const double seen = air.dust * (1.0 + config_.airflow_gain * airspeed_mps);
  const double ratio = dust_ratio_for_concentration(seen);
  if (auto c = dust_.update(ratio / 100.0 * elapsed_ms * 1000.0, now_ms)) dust_value_ = *c;
  f.dust = airflow_adjust(dust_value_, airspeed_mps, config_.airflow_coeff);

  const double since_on = now_s - power_on_s_;
  state_.warm_up_remaining_s = std::max(0.0, std::max(config_.mq_warmup_s, config_.dust_warmup_s) - since_on);
  f.valid = state_.warm_up_remaining_s <= 0.0;
  state_.last_reading = f;
  return f;
}

}  // namespace aqsim::sensors
