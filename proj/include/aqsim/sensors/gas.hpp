#pragma once

// MQ-family metal-oxide gas sensor math: load-divider resistance, clean-air
// calibration, and the log-log sensitivity curves that map Rs/Ro to ppm.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace aqsim::sensors {

enum class GasId : std::uint8_t { LPG, CO, Smoke, O3, CO2 };

std::string_view to_string(GasId gas);
std::optional<GasId> parse_gas(std::string_view name);

/// A straight line on the datasheet's log10(ppm) vs log10(Rs/Ro) chart:
/// (p0, p1) is a point on the line and p2 its slope.
struct GasCurve {
  GasId gas = GasId::CO;
  double p0 = 0;
  double p1 = 0;
  double p2 = -1;
};

inline constexpr GasCurve kLpgCurve{GasId::LPG, 2.3, 0.21, -0.47};
inline constexpr GasCurve kCoCurve{GasId::CO, 2.3, 0.72, -0.34};
inline constexpr GasCurve kSmokeCurve{GasId::Smoke, 2.3, 0.53, -0.44};
inline constexpr GasCurve kO3Curve{GasId::O3, 0.69, 0.69, -0.76};

/// ppm = a * (Rs/Ro)^(-b) written as a GasCurve.
GasCurve power_law_curve(GasId gas, double a, double b);

struct CalibrationParams {
  double rl_kohm = 5.0;
  double clean_air_factor = 9.83;
  int sample_count = 50;
  int sample_interval_ms = 500;
  int read_sample_count = 5;
  int read_interval_ms = 50;
};

inline constexpr int kAdcMax = 1023;

/// Sensor resistance from a 10-bit ADC reading of the load-divider output.
/// Throws DomainError for raw_adc == 0 and for values outside 1..1023.
double mq_resistance(int raw_adc, double rl_kohm);

/// Inverse of mq_resistance before quantisation: the (real-valued) ADC code
/// that a sensor resistance produces.
double adc_for_resistance(double rs_kohm, double rl_kohm);

/// Ro from clean-air samples: mean resistance divided by the clean-air factor.
double mq_calibrate(std::span<const int> samples, const CalibrationParams& params);

struct PpmOptions {
  /// Evaluate with natural log and single precision, as the sensor board's
  /// firmware does, instead of base-10 double precision.
  bool natural_log = false;
  /// Truncate toward zero like the firmware's integer return.
  bool truncate_to_int = false;
};

double gas_ppm(double rs_ro_ratio, const GasCurve& curve, PpmOptions opts = {});

/// Rs/Ro that a true concentration produces; exact inverse of gas_ppm.
double curve_forward(double ppm, const GasCurve& curve);

inline constexpr double kMq135RZero = 206.85;

/// CO2 from an MQ-135 reading. The curve is caller-supplied; there is no
/// authoritative default.
double mq135_co2_ppm(int raw_adc, double rzero_kohm, const GasCurve& curve, double rl_kohm = 10.0);
double mq135_co2_ppm_from_resistance(double rs_kohm, double rzero_kohm, const GasCurve& curve);

}  // namespace aqsim::sensors
