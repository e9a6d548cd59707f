#include "aqsim/sensors/gas.hpp"

#include <cmath>
#include <string>

#include "aqsim/common/error.hpp"

namespace aqsim::sensors {

std::string_view to_string(GasId gas) {
  switch (gas) {
    case GasId::LPG: return "LPG";
    case GasId::CO: return "CO";
    case GasId::Smoke: return "SMOKE";
    case GasId::O3: return "O3";
    case GasId::CO2: return "CO2";
  }
  return "?";
}

std::optional<GasId> parse_gas(std::string_view name) {
  for (auto g : {GasId::LPG, GasId::CO, GasId::Smoke, GasId::O3, GasId::CO2}) {
    if (to_string(g) == name) return g;
  }
  return std::nullopt;
}

GasCurve power_law_curve(GasId gas, double a, double b) {
  if (!(a > 0) || b == 0) throw DomainError("power_law_curve: need a > 0 and b != 0");
  // log10(ppm) = log10(a) - b*log10(r)  <=>  p0 = log10(a), p1 = 0, p2 = -1/b
  return {gas, std::log10(a), 0.0, -1.0 / b};
}

double mq_resistance(int raw_adc, double rl_kohm) {
  if (raw_adc == 0) throw DomainError("mq_resistance: raw_adc = 0 divides by zero");
  if (raw_adc < 1 || raw_adc > kAdcMax) throw DomainError("mq_resistance: raw_adc outside 1..1023");
  return rl_kohm * (kAdcMax - raw_adc) / raw_adc;
}

double adc_for_resistance(double rs_kohm, double rl_kohm) {
  if (rs_kohm < 0) throw DomainError("adc_for_resistance: negative resistance");
  return kAdcMax * rl_kohm / (rs_kohm + rl_kohm);
}

double mq_calibrate(std::span<const int> samples, const CalibrationParams& params) {
  if (samples.empty()) throw DomainError("mq_calibrate: no samples");
  double sum = 0;
  for (int s : samples) sum += mq_resistance(s, params.rl_kohm);
  return sum / static_cast<double>(samples.size()) / params.clean_air_factor;
}

double gas_ppm(double rs_ro_ratio, const GasCurve& curve, PpmOptions opts) {
  if (curve.p2 == 0) throw DomainError("gas_ppm: curve slope is zero");
  if (!(rs_ro_ratio > 0)) throw DomainError("gas_ppm: Rs/Ro must be positive");
  double ppm;
  if (opts.natural_log) {
    const float r = static_cast<float>(rs_ro_ratio);
    const float p0 = static_cast<float>(curve.p0), p1 = static_cast<float>(curve.p1), p2 = static_cast<float>(curve.p2);
    ppm = std::pow(10.0f, ((std::log(r) - p1) / p2) + p0);
  } else {
    ppm = std::pow(10.0, ((std::log10(rs_ro_ratio) - curve.p1) / curve.p2) + curve.p0);
  }
  if (opts.truncate_to_int) ppm = std::trunc(ppm);
  return ppm;
}

double curve_forward(double ppm, const GasCurve& curve) {
  if (!(ppm > 0)) throw DomainError("curve_forward: ppm must be positive");
  return std::pow(10.0, curve.p1 + curve.p2 * (std::log10(ppm) - curve.p0));
}

double mq135_co2_ppm_from_resistance(double rs_kohm, double rzero_kohm, const GasCurve& curve) {
  if (!(rzero_kohm > 0)) throw DomainError("mq135: rzero must be positive");
  return gas_ppm(rs_kohm / rzero_kohm, curve);
}

double mq135_co2_ppm(int raw_adc, double rzero_kohm, const GasCurve& curve, double rl_kohm) {
  return mq135_co2_ppm_from_resistance(mq_resistance(raw_adc, rl_kohm), rzero_kohm, curve);
}

}  // namespace aqsim::sensors
