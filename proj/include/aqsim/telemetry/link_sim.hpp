#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "aqsim/common/random.hpp"

namespace aqsim::telemetry {

/// Latency model of the cellular link. Each payload is delayed by
/// uniform[base_delay_min_ms, base_delay_max_ms] plus, with
/// spike_probability, an extra spike_delay_ms. The link is a reliable
/// ordered stream, so loss_rate does not drop single payloads: a lost
/// payload breaks the connection (the payload and everything in flight is
/// gone and both ends must reconnect).
struct LinkConfig {
  double base_delay_min_ms = 10.0;
  double base_delay_max_ms = 50.0;
  double spike_delay_ms = 1700.0;
  double spike_probability = 0.001;
  double loss_rate = 0.0;
  std::uint64_t seed = 42;

  static LinkConfig ideal() { return {0, 0, 0, 0, 0, 42}; }
};

std::vector<std::string> validate(const LinkConfig& cfg);

/// Scheduled outage [start_ms, end_ms): the connection drops at start and
/// cannot be re-established before end.
struct Outage {
  double start_ms = 0;
  double end_ms = 0;
};

/// One direction of a connection. Deliveries never overtake each other:
/// a payload is released at max(send time + its delay, previous release),
/// which is how a byte stream behaves when one segment is held up.
template <typename T>
class LinkChannel {
 public:
  struct Delivery {
    double at_ms;
    double delay_ms;  // sampled delay before head-of-line blocking
    T payload;
  };

  LinkChannel(LinkConfig cfg, Rng rng) : cfg_(cfg), rng_(rng) {}

  /// Returns false when the payload was lost, which breaks the connection.
  bool send(T payload, double now_ms) {
    if (rng_.bernoulli(cfg_.loss_rate)) {
      ++lost_;
      return false;
    }
    double delay = rng_.uniform(cfg_.base_delay_min_ms, cfg_.base_delay_max_ms);
    if (rng_.bernoulli(cfg_.spike_probability)) delay += cfg_.spike_delay_ms;
    const double at = std::max(now_ms + delay, last_release_ms_);
    last_release_ms_ = at;
    queue_.push_back({at, delay, std::move(payload)});
    ++sent_;
    return true;
  }

  /// Payloads due at or before now_ms, in send order.
  std::vector<Delivery> poll(double now_ms) {
    std::vector<Delivery> out;
    while (!queue_.empty() && queue_.front().at_ms <= now_ms) {
      out.push_back(std::move(queue_.front()));
      queue_.pop_front();
    }
    return out;
  }

  std::optional<double> next_due_ms() const {
    if (queue_.empty()) return std::nullopt;
    return queue_.front().at_ms;
  }

  /// Connection teardown: in-flight payloads are discarded.
  std::size_t reset() {
    const auto n = queue_.size();
    queue_.clear();
    last_release_ms_ = 0;
    return n;
  }

  std::size_t in_flight() const { return queue_.size(); }
  std::uint64_t sent() const { return sent_; }
  std::uint64_t lost() const { return lost_; }
  const LinkConfig& config() const { return cfg_; }

 private:
  LinkConfig cfg_;
  Rng rng_;
  std::deque<Delivery> queue_;
  double last_release_ms_ = 0;
  std::uint64_t sent_ = 0;
  std::uint64_t lost_ = 0;
};

}  // namespace aqsim::telemetry
