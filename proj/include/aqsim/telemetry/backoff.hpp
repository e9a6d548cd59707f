#pragma once

#include <algorithm>

namespace aqsim::telemetry {

/// Exponential reconnect delay: initial, 2x, 4x ... capped at max_s.
class Backoff {
 public:
  explicit Backoff(double initial_s = 0.1, double max_s = 5.0) : initial_(initial_s), max_(max_s), next_(initial_s) {}

  /// Delay to wait before the next attempt; doubles the one after.
  double next_delay() {
    const double d = next_;
    next_ = std::min(next_ * 2.0, max_);
    return d;
  }
  void reset() { next_ = initial_; }
  double peek() const { return next_; }

 private:
  double initial_;
  double max_;
  double next_;
};

}  // namespace aqsim::telemetry
