#include "aqsim/telemetry/relay.hpp"

#include <cmath>

#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"

namespace aqsim::telemetry {

RelayCore::RelayCore(RelayConfig cfg) : cfg_(std::move(cfg)) {
  if (!valid_identifier(cfg_.token)) throw ValidationError({"relay.token must be 1..64 chars of [A-Za-z0-9_.-]"});
}

void RelayCore::on_open(ConnId id, double now) { conns_[id] = Conn{Role::Pending, {}, now, now, false}; }

void RelayCore::close(ConnId id) {
  auto it = conns_.find(id);
  if (it == conns_.end() || it->second.closing) return;
  it->second.closing = true;
  out_.closes.push_back(id);
}

void RelayCore::broadcast_ground(const std::string& bytes) {
  for (const auto& [id, c] : conns_) {
    if (c.role == Role::Ground && !c.closing) send(id, bytes);
  }
}

void RelayCore::reject(ConnId id, const std::string& code, const std::string& message) {
  ++stats_.rejected_hellos;
  send(id, "ERR " + code + ' ' + message + '\n');
  close(id);
}

void RelayCore::handle_hello(ConnId id, Conn& c, const std::string& line) {
  Hello h;
  try {
    h = decode_hello(line);
  } catch (const ParseError& e) {
    reject(id, "bad-hello", e.what());
    return;
  }
  if (h.version != kProtocolVersion) {
    reject(id, "version-mismatch", "relay speaks protocol " + std::to_string(kProtocolVersion));
    return;
  }
  if (h.token != cfg_.token) {
    reject(id, "auth-failed", "invalid token");
    return;
  }
  if (h.role == Hello::Role::Uav) {
    if (uavs_.count(h.uav_id)) {
      reject(id, "duplicate-id", h.uav_id + " is already registered");
      return;
    }
    c.role = Role::Uav;
    c.uav_id = h.uav_id;
    uavs_[h.uav_id] = id;
    send(id, "OK " + std::to_string(kProtocolVersion) + '\n');
    broadcast_ground(wrap(h.uav_id, "R"));
  } else {
    c.role = Role::Ground;
    send(id, "OK " + std::to_string(kProtocolVersion) + '\n');
    for (const auto& [uav, _] : uavs_) send(id, wrap(uav, "R"));
  }
}

void RelayCore::on_item(ConnId id, const StreamDecoder::Item& item, double now) {
  auto it = conns_.find(id);
  if (it == conns_.end() || it->second.closing) return;
  Conn& c = it->second;
  c.last_rx = now;
  switch (c.role) {
    case Role::Pending:
      handle_hello(id, c, item.line);
      break;
    case Role::Uav: {
      std::string bytes = wrap(c.uav_id, item.line);
      bytes += item.payload;
      ++stats_.forwarded_up;
      broadcast_ground(bytes);
      break;
    }
    case Role::Ground: {
      const auto line = text::trim(item.line);
      if (line.size() >= 2 && line[0] == 'H' && line[1] == ' ') break;  // keepalive
      Envelope env;
      try {
        env = unwrap(line);
      } catch (const ParseError&) {
        send(id, "ERR bad-line expected 'U <uav_id> <message>'\n");
        break;
      }
      const auto target = uavs_.find(env.uav_id);
      if (target == uavs_.end()) {
        const auto f = text::split_ws(env.inner);
        if (f.size() >= 2 && f[0] == "C") {
          ++stats_.not_connected;
          send(id, wrap(env.uav_id, "E " + std::string(f[1]) + " not-connected"));
        }
        break;
      }
      std::string bytes = env.inner + '\n';
      bytes += item.payload;
      ++stats_.forwarded_down;
      send(target->second, std::move(bytes));
      break;
    }
  }
}

void RelayCore::on_close(ConnId id, double) {
  auto it = conns_.find(id);
  if (it == conns_.end()) return;
  const Conn c = it->second;
  conns_.erase(it);
  if (c.role == Role::Uav) {
    const auto u = uavs_.find(c.uav_id);
    if (u != uavs_.end() && u->second == id) {
      uavs_.erase(u);
      broadcast_ground(wrap(c.uav_id, "X"));
    }
  }
}

void RelayCore::on_tick(double now) {
  std::vector<ConnId> stale;
  for (const auto& [id, c] : conns_) {
    if (c.closing) continue;
    if (c.role == Role::Pending ? now - c.opened > cfg_.hello_timeout_s : now - c.last_rx > cfg_.idle_timeout_s) {
      stale.push_back(id);
    }
  }
  for (auto id : stale) {
    close(id);
    // a silent peer will not report its own close; forget it right away
    on_close(id, now);
  }
  if (now >= next_heartbeat_) {
    const std::string hb = encode(Heartbeat{static_cast<std::int64_t>(std::llround(now * 1000.0))});
    for (const auto& [id, c] : conns_) {
      if (c.role != Role::Pending && !c.closing) send(id, hb);
    }
    next_heartbeat_ = std::max(next_heartbeat_ + cfg_.heartbeat_period_s, now);
    if (next_heartbeat_ <= now) next_heartbeat_ = now + cfg_.heartbeat_period_s;
  }
}

RelayCore::Output RelayCore::take() {
  Output o;
  std::swap(o, out_);
  return o;
}

std::vector<std::string> RelayCore::registered_uavs() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : uavs_) out.push_back(id);
  return out;
}

std::size_t RelayCore::ground_count() const {
  std::size_t n = 0;
  for (const auto& [_, c] : conns_) n += c.role == Role::Ground;
  return n;
}

}  // namespace aqsim::telemetry
