#include "aqsim/ground/station.hpp"

#include <algorithm>
#include <json.hpp>

#include "aqsim/telemetry/uav_session.hpp"

namespace aqsim::ground {

using telemetry::encode;
using telemetry::wrap;

namespace {
std::string chomp(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}
}  // namespace

std::optional<LiveEvent> LiveHub::Subscription::wait(std::chrono::milliseconds timeout) {
  std::unique_lock<std::mutex> lk(mu_);
  cv_.wait_for(lk, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  LiveEvent e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

std::uint64_t LiveHub::Subscription::dropped() const {
  std::lock_guard<std::mutex> lk(mu_);
  return dropped_;
}

bool LiveHub::Subscription::closed() const {
  std::lock_guard<std::mutex> lk(mu_);
  return closed_;
}

std::shared_ptr<LiveHub::Subscription> LiveHub::subscribe() {
  auto s = std::make_shared<Subscription>();
  std::lock_guard<std::mutex> lk(mu_);
  if (closed_) {
    s->closed_ = true;
  } else {
    subs_.push_back(s);
  }
  return s;
}

void LiveHub::unsubscribe(const std::shared_ptr<Subscription>& s) {
  std::lock_guard<std::mutex> lk(mu_);
  std::erase(subs_, s);
}

void LiveHub::publish(std::string name, std::string data) {
  std::lock_guard<std::mutex> lk(mu_);
  if (closed_) return;
  const LiveEvent e{next_id_++, std::move(name), std::move(data)};
  for (const auto& s : subs_) {
    {
      std::lock_guard<std::mutex> sl(s->mu_);
      s->queue_.push_back(e);
      while (s->queue_.size() > limit_) {
        s->queue_.pop_front();
        ++s->dropped_;
      }
    }
    s->cv_.notify_one();
  }
}

void LiveHub::close() {
  std::lock_guard<std::mutex> lk(mu_);
  closed_ = true;
  for (const auto& s : subs_) {
    {
      std::lock_guard<std::mutex> sl(s->mu_);
      s->closed_ = true;
    }
    s->cv_.notify_all();
  }
  subs_.clear();
}

std::size_t LiveHub::subscribers() const {
  std::lock_guard<std::mutex> lk(mu_);
  return subs_.size();
}

std::string alert_json(const StoredAlert& a) {
  nlohmann::ordered_json j;
  j["uav_id"] = a.uav_id;
  j["parameter"] = sensors::to_string(a.parameter);
  j["window_s"] = a.window_s;
  j["averaged_value"] = a.averaged_value;
  j["limit"] = a.limit;
  j["location"] = {{"lat", a.location.lat}, {"lon", a.location.lon}, {"alt", a.location.alt}};
  j["timestamp"] = format_iso8601(a.ts);
  return j.dump();
}

std::string dispatch_json(const telemetry::DispatchResult& r) {
  nlohmann::ordered_json j;
  j["status"] = telemetry::to_string(r.status);
  j["seq"] = r.seq;
  j["uav_id"] = r.uav_id;
  j["message"] = r.message;
  return j.dump();
}

GroundStation::GroundStation(MeasurementStore& store, StationConfig cfg)
    : store_(store), live_(cfg.live_queue), alerts_(std::move(cfg.alerts)) {}

telemetry::GroundLinkCore::Handlers GroundStation::handlers() {
  telemetry::GroundLinkCore::Handlers h;
  h.data = [this](const std::string& u, const telemetry::DataLine& d, double now) { on_data(u, d, now); };
  h.status = [this](const std::string& u, const telemetry::StatusLine& s, double now) { on_status(u, s, now); };
  h.video = [this](const std::string& u, const telemetry::VideoHeader& v, const std::string&, double now) {
    on_video(u, v, now);
  };
  h.presence = [this](const std::string& u, bool up, double now) { on_presence(u, up, now); };
  h.command_done = [this](const telemetry::DispatchResult& r) { on_command_done(r); };
  return h;
}

void GroundStation::on_data(const std::string& uav, const telemetry::DataLine& d, double now) {
  std::vector<StoredAlert> fresh;
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto& v = views_[uav];
    v.uav_id = uav;
    v.last_heard_s = now;
    v.latest = d;
    ++v.frames;
    ++stats_.frames;
    const auto rows = fan_out(uav, d);
    try {
      const auto added = store_.ingest(rows, telemetry::unix_seconds_to_timestamp(now));
      stats_.stored += added;
      stats_.duplicates += rows.size() - added;
      // the UAV clock is authoritative for measurement time
      fresh = alerts_.scan(store_, uav, d.ts);
      for (const auto& a : fresh) store_.add_alert(a);
      stats_.alerts += fresh.size();
    } catch (const StorageError&) {
      ++stats_.storage_errors;
    }
  }
  live_.publish("frame", chomp(wrap(uav, encode(d))));
  for (const auto& a : fresh) live_.publish("alert", alert_json(a));
}

void GroundStation::on_status(const std::string& uav, const telemetry::StatusLine& s, double now) {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto& v = views_[uav];
    v.uav_id = uav;
    v.last_heard_s = now;
    v.status = s;
  }
  live_.publish("status", chomp(wrap(uav, encode(s))));
}

void GroundStation::on_video(const std::string& uav, const telemetry::VideoHeader& h, double now) {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto& v = views_[uav];
    v.uav_id = uav;
    v.last_heard_s = now;
    v.video = h;
    v.video_latency_s = now - static_cast<double>(h.source_unix_ms) / 1000.0;
    ++v.video_frames;
  }
  live_.publish("video", chomp(wrap(uav, encode(h))));
}

void GroundStation::on_presence(const std::string& uav, bool connected, double now) {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto& v = views_[uav];
    v.uav_id = uav;
    v.connected = connected;
    if (connected) v.last_heard_s = now;
  }
  live_.publish("presence", uav + (connected ? " R" : " X"));
}

void GroundStation::on_command_done(const telemetry::DispatchResult& r) { live_.publish("command", dispatch_json(r)); }

void GroundStation::set_dispatcher(Dispatcher d) {
  std::lock_guard<std::mutex> lk(mu_);
  dispatcher_ = std::move(d);
}

telemetry::DispatchResult GroundStation::command(const std::string& uav, telemetry::Command c) {
  Dispatcher d;
  {
    std::lock_guard<std::mutex> lk(mu_);
    d = dispatcher_;
  }
  if (!d) return {telemetry::DispatchStatus::NotConnected, c.seq, uav, "no relay link"};
  return d(uav, std::move(c));
}

std::optional<UavView> GroundStation::uav(const std::string& id) const {
  std::lock_guard<std::mutex> lk(mu_);
  const auto it = views_.find(id);
  if (it == views_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> GroundStation::uavs() const {
  std::lock_guard<std::mutex> lk(mu_);
  std::vector<std::string> out;
  for (const auto& [id, v] : views_) out.push_back(id);
  return out;
}

GroundStation::Stats GroundStation::stats() const {
  std::lock_guard<std::mutex> lk(mu_);
  return stats_;
}

}  // namespace aqsim::ground
