#include "aqsim/sensors/dust.hpp"

#include <algorithm>

#include "aqsim/common/error.hpp"

namespace aqsim::sensors {

double dust_concentration(double r) {
  if (!(r >= 0 && r <= 100)) throw DomainError("dust_concentration: ratio outside [0, 100]");
  return 1.1 * r * r * r - 3.8 * r * r + 520.0 * r + 0.62;
}

double dust_ratio_for_concentration(double c) {
  if (c <= dust_concentration(0)) return 0.0;
  if (c >= dust_concentration(100)) return 100.0;
  double lo = 0, hi = 100;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dust_concentration(mid) < c ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

DustSampler::DustSampler(double window_ms, double start_ms) : window_ms_(window_ms), start_ms_(start_ms) {
  if (!(window_ms > 0)) throw DomainError("DustSampler: window must be positive");
}

std::optional<double> DustSampler::update(double pulse_low_us, double now_ms) {
  if (pulse_low_us < 0) throw DomainError("DustSampler: negative pulse duration");
  lpo_us_ = std::min(lpo_us_ + pulse_low_us, window_ms_ * 1000.0);
  if (now_ms - start_ms_ < window_ms_) return std::nullopt;
  const double ratio = std::min(lpo_us_ / (window_ms_ * 10.0), 100.0);
  lpo_us_ = 0;
  start_ms_ = now_ms;
  return dust_concentration(ratio);
}

double airflow_adjust(double dust_reading, double airspeed_mps, double coeff) {
  if (airspeed_mps < 0) throw DomainError("airflow_adjust: negative airspeed");
  return dust_reading / (1.0 + coeff * airspeed_mps);
}

}  // namespace aqsim::sensors
