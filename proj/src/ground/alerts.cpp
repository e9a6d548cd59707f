#include "aqsim/ground/alerts.hpp"

namespace aqsim::ground {

AlertEngine::AlertEngine(AlertConfig cfg) : cfg_(std::move(cfg)) {}

std::vector<StoredAlert> AlertEngine::scan(const MeasurementStore& store, const std::string& uav, Timestamp now) {
  std::vector<StoredAlert> out;
  const auto now_ms = to_unix_ms(now);
  for (const auto& lim : cfg_.limits) {
    const auto rows = window_samples(store, lim.parameter, lim.window_s, now, uav);
    std::vector<std::pair<double, double>> samples;
    samples.reserve(rows.size());
    for (const auto& m : rows) samples.emplace_back(static_cast<double>(to_unix_ms(m.ts) - now_ms) / 1000.0, m.value);
    auto avg = time_weighted_mean(samples);
    if (avg && lim.parameter == Parameter::Dust) *avg *= cfg_.dust_factor;

    bool& active = active_[{uav, lim.parameter, lim.window_s}];
    const bool exceeded = avg && sensors::who_check(lim.parameter, *avg, lim.window_s, cfg_.limits).exceeded;
    if (exceeded && !active) {
      const auto& last = rows.back();
      out.push_back({uav, lim.parameter, lim.window_s, *avg, lim.limit, {last.lat, last.lon, last.alt}, now});
    }
    active = exceeded;
  }
  return out;
}

std::vector<StoredAlert> AlertEngine::scan_all(const MeasurementStore& store, Timestamp now) {
  std::vector<StoredAlert> out;
  for (const auto& uav : store.uav_ids()) {
    auto a = scan(store, uav, now);
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

bool AlertEngine::in_episode(const std::string& uav, Parameter p, double window_s) const {
  const auto it = active_.find({uav, p, window_s});
  return it != active_.end() && it->second;
}

}  // namespace aqsim::ground
