#include "aqsim/telemetry/uav_session.hpp"

#include <cmath>

#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"

namespace aqsim::telemetry {

std::vector<std::string> validate(const SessionConfig& c) {
  std::vector<std::string> out;
  if (!valid_identifier(c.uav_id)) out.emplace_back("session.uav_id must be 1..64 chars of [A-Za-z0-9_.-]");
  if (!valid_identifier(c.token)) out.emplace_back("session.token must be 1..64 chars of [A-Za-z0-9_.-]");
  auto positive = [&](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) out.emplace_back(std::string("session.") + name + " must be > 0");
  };
  positive(c.data_period_s, "data_period_s");
  positive(c.status_period_s, "status_period_s");
  positive(c.heartbeat_period_s, "heartbeat_period_s");
  positive(c.link_quiet_s, "link_quiet_s");
  positive(c.idle_timeout_s, "idle_timeout_s");
  positive(c.video_fps, "video_fps");
  positive(c.reconnect_initial_s, "reconnect_initial_s");
  positive(c.reconnect_max_s, "reconnect_max_s");
  if (!(c.video_pipeline_delay_s >= 0)) out.emplace_back("session.video_pipeline_delay_s must be >= 0");
  if (c.video_frame_bytes > kMaxVideoBytes) out.emplace_back("session.video_frame_bytes exceeds the protocol maximum");
  if (c.dedupe_window == 0) out.emplace_back("session.dedupe_window must be >= 1");
  return out;
}

std::string synthetic_video_payload(std::uint64_t frame_no, std::size_t bytes) {
  std::string p(bytes, '\0');
  std::uint64_t x = frame_no * 0x9E3779B97F4A7C15ULL + 1;
  for (auto& c : p) {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    c = static_cast<char>(x & 0xff);
  }
  return p;
}

UavSessionCore::UavSessionCore(SessionConfig cfg, CommandHandler handler, SnapshotSource snapshot)
    : cfg_(std::move(cfg)),
      handler_(std::move(handler)),
      snapshot_(std::move(snapshot)),
      backoff_(cfg_.reconnect_initial_s, cfg_.reconnect_max_s) {
  if (auto problems = validate(cfg_); !problems.empty()) throw ValidationError(std::move(problems));
}

bool UavSessionCore::should_connect(double now) const { return phase_ == Phase::Disconnected && now >= next_attempt_; }

void UavSessionCore::on_connected(double now) {
  phase_ = Phase::Handshaking;
  close_requested_ = false;
  last_rx_ = now;
  outbox_.clear();
  Hello h;
  h.role = Hello::Role::Uav;
  h.uav_id = cfg_.uav_id;
  h.token = cfg_.token;
  send(encode_hello(h));
}

void UavSessionCore::on_connect_failed(double now) {
  if (phase_ == Phase::Failed) return;
  phase_ = Phase::Disconnected;
  next_attempt_ = now + backoff_.next_delay();
}

void UavSessionCore::on_disconnected(double now) {
  outbox_.clear();
  close_requested_ = false;
  if (phase_ == Phase::Failed) return;
  phase_ = Phase::Disconnected;
  next_attempt_ = now + backoff_.next_delay();
  // frames waiting in the encoder belong to the dead stream
  pipeline_.clear();
}

void UavSessionCore::drop_connection(double now, std::string reason) {
  last_error_ = std::move(reason);
  close_requested_ = true;
  (void)now;
}

void UavSessionCore::on_line(std::string_view line, double now) {
  if (phase_ == Phase::Disconnected || phase_ == Phase::Failed) return;
  last_rx_ = now;
  const auto l = text::trim(line);
  if (phase_ == Phase::Handshaking) {
    const auto f = text::split_ws(l);
    if (f.size() == 2 && f[0] == "OK" && f[1] == std::to_string(kProtocolVersion)) {
      phase_ = Phase::Ready;
      backoff_.reset();
      ++stats_.connects;
      next_heartbeat_ = now;
      next_status_ = now;
      if (data_on_) next_data_ = now + cfg_.data_period_s;
      if (video_on_) next_capture_ = now;
      return;
    }
    std::string err = std::string(l);
    if (!f.empty() && f[0] == "ERR" && f.size() >= 2) {
      // duplicate registrations clear once the relay drops the stale session
      if (f[1] != "duplicate-id") {
        phase_ = Phase::Failed;
      }
    } else {
      phase_ = Phase::Failed;
      err = "unexpected handshake reply: " + err;
    }
    drop_connection(now, err);
    return;
  }

  Message m;
  try {
    m = decode(l);
  } catch (const ParseError& e) {
    // unparseable commands are answered when the seq is recoverable
    const auto f = text::split_ws(l);
    if (f.size() >= 2 && f[0] == "C") {
      if (const auto seq = text::to_int(f[1]); seq && *seq > 0) {
        send(encode(Ack{static_cast<std::uint64_t>(*seq), false, std::string("malformed command: ") + e.what()}));
      }
    }
    return;
  }
  if (const auto* c = std::get_if<Command>(&m)) handle_command(*c);
  // heartbeats only refresh last_rx_
}

void UavSessionCore::handle_command(const Command& c) {
  if (const auto it = acks_.find(c.seq); it != acks_.end()) {
    ++stats_.duplicate_commands;
    send(encode(it->second));
    return;
  }
  if (highest_seq_ >= cfg_.dedupe_window && c.seq <= highest_seq_ - cfg_.dedupe_window) {
    // outside the window we cannot tell whether it already ran
    send(encode(Ack{c.seq, false, "stale seq"}));
    return;
  }
  Ack ack{c.seq, true, {}};
  switch (c.kind) {
    case CommandKind::StartData:
      if (!data_on_) {
        data_on_ = true;
        next_data_ = last_rx_ + cfg_.data_period_s;
      }
      break;
    case CommandKind::StopData:
      data_on_ = false;
      break;
    case CommandKind::StartVideo:
      if (!video_on_) {
        video_on_ = true;
        next_capture_ = last_rx_;
      }
      break;
    case CommandKind::StopVideo:
      video_on_ = false;
      pipeline_.clear();
      break;
    default:
      if (!handler_) {
        ack = {c.seq, false, "no flight controller"};
      } else {
        ack = handler_(c);
        ack.seq = c.seq;
      }
      break;
  }
  ++stats_.commands_executed;
  acks_[c.seq] = ack;
  highest_seq_ = std::max(highest_seq_, c.seq);
  while (acks_.size() > cfg_.dedupe_window) acks_.erase(acks_.begin());
  send(encode(ack));
}

void UavSessionCore::on_tick(double now) {
  if (phase_ != Phase::Ready) return;
  if (now - last_rx_ > cfg_.idle_timeout_s) {
    drop_connection(now, "relay silent");
    return;
  }
  if (now >= next_heartbeat_) {
    send(encode(Heartbeat{static_cast<std::int64_t>(std::llround(now * 1000.0))}));
    next_heartbeat_ += cfg_.heartbeat_period_s;
    if (next_heartbeat_ <= now) next_heartbeat_ = now + cfg_.heartbeat_period_s;
  }

  const bool status_due = now >= next_status_;
  const bool data_due = data_on_ && now >= next_data_;
  if (status_due || data_due) {
    const auto snap = snapshot_ ? snapshot_() : UavSnapshot{};
    const auto ts = unix_seconds_to_timestamp(now);
    if (data_due) {
      if (snap.frame) {
        send(encode_frame(*snap.frame, snap.gps.value_or(Position{}), ts));
        ++stats_.data_lines;
      }
      next_data_ += cfg_.data_period_s;
      if (next_data_ <= now) next_data_ = now + cfg_.data_period_s;
    }
    if (status_due) {
      if (snap.state) {
        const auto& s = *snap.state;
        StatusLine st;
        st.ts = ts;
        st.mode = s.mode;
        st.status = s.status;
        st.pos = {s.position.lat, s.position.lon, s.position.alt};
        st.heading_deg = s.heading_deg;
        st.airspeed_mps = s.airspeed_mps;
        st.battery_mah = s.battery_remaining_mah;
        st.throttle_pct = s.throttle_pct;
        st.link_ok = s.comm_ok;
        st.target_index = s.target_index;
        send(encode(st));
        ++stats_.status_lines;
      }
      next_status_ += cfg_.status_period_s;
      if (next_status_ <= now) next_status_ = now + cfg_.status_period_s;
    }
  }

  if (video_on_) {
    const double period = 1.0 / cfg_.video_fps;
    while (now >= next_capture_) {
      pipeline_.push_back({next_capture_ + cfg_.video_pipeline_delay_s, next_frame_no_++,
                           static_cast<std::int64_t>(std::llround(next_capture_ * 1000.0))});
      next_capture_ += period;
    }
  }
  while (!pipeline_.empty() && pipeline_.front().release_s <= now) {
    const auto f = pipeline_.front();
    pipeline_.pop_front();
    std::string out = encode(VideoHeader{f.frame_no, f.source_ms, cfg_.video_frame_bytes});
    out += synthetic_video_payload(f.frame_no, cfg_.video_frame_bytes);
    send(std::move(out));
    ++stats_.video_frames;
  }
}

std::vector<std::string> UavSessionCore::take_outbox() {
  std::vector<std::string> out;
  out.swap(outbox_);
  return out;
}

bool UavSessionCore::link_ok(double now) const { return phase_ == Phase::Ready && now - last_rx_ <= cfg_.link_quiet_s; }

}  // namespace aqsim::telemetry
