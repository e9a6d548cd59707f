#include "aqsim/telemetry/link_sim.hpp"

#include <cmath>

namespace aqsim::telemetry {

std::vector<std::string> validate(const LinkConfig& c) {
  std::vector<std::string> out;
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0; };
  auto prob = [](double v) { return std::isfinite(v) && v >= 0 && v <= 1; };
  if (!finite_nonneg(c.base_delay_min_ms)) out.emplace_back("link.base_delay_min_ms must be >= 0");
  if (!finite_nonneg(c.base_delay_max_ms)) out.emplace_back("link.base_delay_max_ms must be >= 0");
  if (c.base_delay_max_ms < c.base_delay_min_ms) out.emplace_back("link.base_delay_max_ms must be >= base_delay_min_ms");
  if (!finite_nonneg(c.spike_delay_ms)) out.emplace_back("link.spike_delay_ms must be >= 0");
  if (!prob(c.spike_probability)) out.emplace_back("link.spike_probability must be in [0, 1]");
  if (!prob(c.loss_rate)) out.emplace_back("link.loss_rate must be in [0, 1]");
  return out;
}

}  // namespace aqsim::telemetry
