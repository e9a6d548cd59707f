#include "aqsim/telemetry/ground_link.hpp"

#include <cmath>

#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"

namespace aqsim::telemetry {

namespace {
// completed results kept for lookups by late pollers
constexpr std::size_t kMaxResults = 4096;
}

std::string_view to_string(DispatchStatus s) {
  switch (s) {
    case DispatchStatus::Pending: return "pending";
    case DispatchStatus::Acked: return "acked";
    case DispatchStatus::Rejected: return "rejected";
    case DispatchStatus::NotConnected: return "not-connected";
    case DispatchStatus::DeliveryUnknown: return "delivery-unknown";
  }
  return "?";
}

GroundLinkCore::GroundLinkCore(GroundLinkConfig cfg, Handlers handlers)
    : cfg_(std::move(cfg)),
      h_(std::move(handlers)),
      backoff_(cfg_.reconnect_initial_s, cfg_.reconnect_max_s),
      next_seq_(std::max<std::uint64_t>(1, cfg_.first_seq)) {
  if (!valid_identifier(cfg_.token)) throw ValidationError({"ground.token must be 1..64 chars of [A-Za-z0-9_.-]"});
}

bool GroundLinkCore::should_connect(double now) const { return phase_ == Phase::Disconnected && now >= next_attempt_; }

void GroundLinkCore::on_connected(double now) {
  phase_ = Phase::Handshaking;
  close_requested_ = false;
  last_rx_ = now;
  outbox_.clear();
  Hello h;
  h.role = Hello::Role::Ground;
  h.token = cfg_.token;
  send(encode_hello(h));
}

void GroundLinkCore::on_connect_failed(double now) {
  if (phase_ == Phase::Failed) return;
  phase_ = Phase::Disconnected;
  next_attempt_ = now + backoff_.next_delay();
}

void GroundLinkCore::on_disconnected(double now) {
  outbox_.clear();
  close_requested_ = false;
  for (const auto& uav : std::vector<std::string>(present_.begin(), present_.end())) {
    if (h_.presence) h_.presence(uav, false, now);
  }
  present_.clear();
  // in-flight commands keep their deadlines and end as delivery-unknown
  if (phase_ == Phase::Failed) return;
  phase_ = Phase::Disconnected;
  next_attempt_ = now + backoff_.next_delay();
}

void GroundLinkCore::finish(std::uint64_t seq, DispatchStatus st, std::string message) {
  auto& r = results_[seq];
  r.seq = seq;
  r.status = st;
  r.message = std::move(message);
  pending_.erase(seq);
  while (results_.size() > kMaxResults) results_.erase(results_.begin());
  if (h_.command_done) h_.command_done(r);
}

void GroundLinkCore::on_item(const StreamDecoder::Item& item, double now) {
  if (phase_ == Phase::Disconnected || phase_ == Phase::Failed) return;
  last_rx_ = now;
  const auto line = text::trim(item.line);
  if (phase_ == Phase::Handshaking) {
    const auto f = text::split_ws(line);
    if (f.size() == 2 && f[0] == "OK" && f[1] == std::to_string(kProtocolVersion)) {
      phase_ = Phase::Ready;
      backoff_.reset();
      next_heartbeat_ = now;
    } else {
      phase_ = Phase::Failed;
      last_error_ = std::string(line);
      close_requested_ = true;
    }
    return;
  }
  if (line.size() >= 2 && line[0] == 'H' && line[1] == ' ') return;
  if (line.size() >= 4 && line.substr(0, 4) == "ERR ") {
    last_error_ = std::string(line);
    return;
  }

  Envelope env;
  try {
    env = unwrap(line);
  } catch (const ParseError& e) {
    if (h_.bad_line) h_.bad_line("", std::string(line), e.what());
    return;
  }
  const auto& uav = env.uav_id;
  const auto& inner = env.inner;
  if (inner == "R") {
    present_.insert(uav);
    last_heard_[uav] = now;
    if (h_.presence) h_.presence(uav, true, now);
    return;
  }
  if (inner == "X") {
    present_.erase(uav);
    if (h_.presence) h_.presence(uav, false, now);
    return;
  }
  if (inner.size() >= 2 && inner[0] == 'E' && inner[1] == ' ') {
    const auto f = text::split_ws(inner);
    if (f.size() >= 2) {
      if (const auto seq = text::to_int(f[1]); seq && *seq > 0) {
        const auto s = static_cast<std::uint64_t>(*seq);
        if (pending_.count(s)) finish(s, DispatchStatus::NotConnected, "not-connected");
      }
    }
    return;
  }
  last_heard_[uav] = now;
  Message m;
  try {
    m = decode(inner);
  } catch (const ParseError& e) {
    if (h_.bad_line) h_.bad_line(uav, inner, e.what());
    return;
  }
  if (const auto* d = std::get_if<DataLine>(&m)) {
    if (h_.data) h_.data(uav, *d, now);
  } else if (const auto* s = std::get_if<StatusLine>(&m)) {
    if (h_.status) h_.status(uav, *s, now);
  } else if (const auto* v = std::get_if<VideoHeader>(&m)) {
    if (item.payload.size() != v->length) {
      if (h_.bad_line) h_.bad_line(uav, inner, "video payload length mismatch");
    } else if (h_.video) {
      h_.video(uav, *v, item.payload, now);
    }
  } else if (const auto* a = std::get_if<Ack>(&m)) {
    // late acks after a delivery-unknown still settle the result
    const bool known = pending_.count(a->seq) != 0 ||
                       (results_.count(a->seq) && results_[a->seq].status == DispatchStatus::DeliveryUnknown);
    if (known) finish(a->seq, a->ok ? DispatchStatus::Acked : DispatchStatus::Rejected, a->message);
  }
}

void GroundLinkCore::on_tick(double now) {
  std::vector<std::uint64_t> expired;
  for (const auto& [seq, p] : pending_) {
    if (now >= p.deadline) expired.push_back(seq);
  }
  for (auto seq : expired) finish(seq, DispatchStatus::DeliveryUnknown, "no ack within timeout");

  if (phase_ != Phase::Ready) return;
  if (now - last_rx_ > cfg_.idle_timeout_s) {
    last_error_ = "relay silent";
    close_requested_ = true;
    return;
  }
  if (now >= next_heartbeat_) {
    send(encode(Heartbeat{static_cast<std::int64_t>(std::llround(now * 1000.0))}));
    next_heartbeat_ += cfg_.heartbeat_period_s;
    if (next_heartbeat_ <= now) next_heartbeat_ = now + cfg_.heartbeat_period_s;
  }
}

std::vector<std::string> GroundLinkCore::take_outbox() {
  std::vector<std::string> out;
  out.swap(outbox_);
  return out;
}

std::uint64_t GroundLinkCore::dispatch(const std::string& uav_id, Command cmd, double now) {
  if (cmd.seq == 0) cmd.seq = next_seq_++;
  else next_seq_ = std::max(next_seq_, cmd.seq + 1);
  auto& r = results_[cmd.seq];
  r = DispatchResult{DispatchStatus::Pending, cmd.seq, uav_id, {}};
  if (!valid_identifier(uav_id)) {
    finish(cmd.seq, DispatchStatus::NotConnected, "invalid uav id");
    return cmd.seq;
  }
  if (phase_ != Phase::Ready) {
    finish(cmd.seq, DispatchStatus::NotConnected, "relay not connected");
    return cmd.seq;
  }
  if (!present_.count(uav_id)) {
    finish(cmd.seq, DispatchStatus::NotConnected, "not-connected");
    return cmd.seq;
  }
  std::string line = encode(cmd);
  line.pop_back();
  send(wrap(uav_id, line));
  pending_[cmd.seq] = {now + cfg_.command_timeout_s};
  return cmd.seq;
}

std::optional<DispatchResult> GroundLinkCore::result(std::uint64_t seq) const {
  const auto it = results_.find(seq);
  if (it == results_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> GroundLinkCore::uav_silence(const std::string& uav_id, double now) const {
  const auto it = last_heard_.find(uav_id);
  if (it == last_heard_.end()) return std::nullopt;
  return now - it->second;
}

}  // namespace aqsim::telemetry
