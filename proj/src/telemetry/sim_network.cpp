#include "aqsim/telemetry/sim_network.hpp"

#include <cmath>

#include "aqsim/common/error.hpp"

namespace aqsim::telemetry {

SimNetwork::UavSlot::UavSlot(SessionConfig c, UavSessionCore::CommandHandler h, UavSessionCore::SnapshotSource s,
                             LinkConfig up_cfg, LinkConfig down_cfg, Rng up_rng, Rng down_rng, std::vector<Outage> o)
    : core(std::move(c), std::move(h), std::move(s)),
      up(up_cfg, up_rng),
      down(down_cfg, down_rng),
      outages(std::move(o)) {}

SimNetwork::GroundSlot::GroundSlot(GroundLinkConfig c, GroundLinkCore::Handlers h, LinkConfig cfg, Rng a, Rng b)
    : core(std::move(c), std::move(h)), up(cfg, a), down(cfg, b) {}

SimNetwork::SimNetwork(Config cfg, double start_unix_s)
    : cfg_(std::move(cfg)), start_(start_unix_s), now_(start_unix_s), rng_(cfg_.uav_link.seed), relay_(cfg_.relay) {
  std::vector<std::string> problems = validate(cfg_.uav_link);
  for (auto& p : validate(cfg_.ground_link)) problems.push_back("ground " + p);
  if (!(cfg_.tick_s > 0)) problems.emplace_back("tick_s must be > 0");
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

std::size_t SimNetwork::add_uav(SessionConfig cfg, UavSessionCore::CommandHandler handler,
                                UavSessionCore::SnapshotSource snapshot, std::vector<Outage> outages_s) {
  for (auto& o : outages_s) {
    o.start_ms = (start_ + o.start_ms) * 1000.0;
    o.end_ms = (start_ + o.end_ms) * 1000.0;
  }
  uavs_.push_back(std::make_unique<UavSlot>(std::move(cfg), std::move(handler), std::move(snapshot), cfg_.uav_link,
                                            cfg_.uav_link, rng_.fork(), rng_.fork(), std::move(outages_s)));
  return uavs_.size() - 1;
}

std::size_t SimNetwork::add_ground(GroundLinkConfig cfg, GroundLinkCore::Handlers handlers) {
  grounds_.push_back(
      std::make_unique<GroundSlot>(std::move(cfg), std::move(handlers), cfg_.ground_link, rng_.fork(), rng_.fork()));
  return grounds_.size() - 1;
}

SimNetwork::LinkStats SimNetwork::uav_link_stats(std::size_t i) const {
  const auto& u = *uavs_.at(i);
  LinkStats s = u.stats;
  s.sent = u.up.sent() + u.down.sent();
  s.lost = u.up.lost() + u.down.lost();
  return s;
}

bool SimNetwork::in_outage(const UavSlot& u, double t) const {
  const double ms = t * 1000.0;
  for (const auto& o : u.outages) {
    if (ms >= o.start_ms && ms < o.end_ms) return true;
  }
  return false;
}

void SimNetwork::drop_uav(UavSlot& u, double t) {
  if (!u.connected) return;
  u.connected = false;
  u.closing = false;
  u.stats.discarded += u.up.reset() + u.down.reset();
  ++u.stats.disconnects;
  u.at_relay = StreamDecoder{};
  u.at_uav = StreamDecoder{};
  relay_.on_close(u.conn, t);
  u.core.on_disconnected(t);
}

void SimNetwork::drop_ground(GroundSlot& g, double t) {
  if (!g.connected) return;
  g.connected = false;
  g.closing = false;
  g.up.reset();
  g.down.reset();
  g.at_relay = StreamDecoder{};
  g.at_ground = StreamDecoder{};
  relay_.on_close(g.conn, t);
  g.core.on_disconnected(t);
}

void SimNetwork::advance_to(double t) {
  // integer tick counting keeps the schedule free of accumulated rounding;
  // the slack absorbs the coarse ulp of UNIX-epoch doubles
  const double ticks = std::floor((t - start_) / cfg_.tick_s + 1e-3);
  if (ticks < 1) return;
  const auto target = static_cast<std::uint64_t>(ticks);
  while (tick_index_ < target) {
    ++tick_index_;
    now_ = start_ + static_cast<double>(tick_index_) * cfg_.tick_s;
    tick(now_);
  }
}

void SimNetwork::flush(double t) {
  const double ms = t * 1000.0;
  for (auto& up : uavs_) {
    auto& u = *up;
    if (!u.connected) {
      u.core.take_outbox();
      continue;
    }
    for (auto& bytes : u.core.take_outbox()) {
      if (!u.up.send(std::move(bytes), ms)) {
        drop_uav(u, t);
        break;
      }
    }
    if (u.connected && u.core.wants_close()) drop_uav(u, t);
  }
  for (auto& gp : grounds_) {
    auto& g = *gp;
    if (!g.connected) {
      g.core.take_outbox();
      continue;
    }
    for (auto& bytes : g.core.take_outbox()) g.up.send(std::move(bytes), ms);
    if (g.core.wants_close()) drop_ground(g, t);
  }
  auto out = relay_.take();
  for (auto& [conn, bytes] : out.sends) {
    for (auto& up : uavs_) {
      if (up->connected && up->conn == conn) {
        if (!up->down.send(std::move(bytes), ms)) drop_uav(*up, t);
        goto sent;
      }
    }
    for (auto& gp : grounds_) {
      if (gp->connected && gp->conn == conn) {
        gp->down.send(std::move(bytes), ms);
        goto sent;
      }
    }
  sent:;
  }
  // a close by the relay is graceful: the peer still reads what was sent
  for (auto conn : out.closes) {
    for (auto& up : uavs_) {
      if (up->connected && up->conn == conn) up->closing = true;
    }
    for (auto& gp : grounds_) {
      if (gp->connected && gp->conn == conn) gp->closing = true;
    }
  }
}

void SimNetwork::tick(double t) {
  const double ms = t * 1000.0;

  for (auto& up : uavs_) {
    auto& u = *up;
    if (u.connected && in_outage(u, t)) drop_uav(u, t);
    if (!u.connected && u.core.should_connect(t)) {
      if (in_outage(u, t)) {
        u.core.on_connect_failed(t);
      } else {
        u.connected = true;
        u.conn = next_conn_++;
        relay_.on_open(u.conn, t);
        u.core.on_connected(t);
      }
    }
  }
  for (auto& gp : grounds_) {
    auto& g = *gp;
    if (!g.connected && g.core.should_connect(t)) {
      g.connected = true;
      g.conn = next_conn_++;
      relay_.on_open(g.conn, t);
      g.core.on_connected(t);
    }
  }
  flush(t);

  for (auto& up : uavs_) {
    auto& u = *up;
    if (!u.connected) continue;
    try {
      for (auto& d : u.up.poll(ms)) {
        ++u.stats.delivered;
        u.at_relay.feed(d.payload);
        while (auto item = u.at_relay.next()) relay_.on_item(u.conn, *item, t);
      }
      for (auto& d : u.down.poll(ms)) {
        ++u.stats.delivered;
        u.at_uav.feed(d.payload);
        while (auto item = u.at_uav.next()) u.core.on_line(item->line, t);
      }
    } catch (const ParseError&) {
      drop_uav(u, t);
    }
    if (u.closing && u.down.in_flight() == 0) drop_uav(u, t);
  }
  for (auto& gp : grounds_) {
    auto& g = *gp;
    if (!g.connected) continue;
    try {
      for (auto& d : g.up.poll(ms)) {
        g.at_relay.feed(d.payload);
        while (auto item = g.at_relay.next()) relay_.on_item(g.conn, *item, t);
      }
      for (auto& d : g.down.poll(ms)) {
        g.at_ground.feed(d.payload);
        while (auto item = g.at_ground.next()) g.core.on_item(*item, t);
      }
    } catch (const ParseError&) {
      drop_ground(g, t);
    }
    if (g.closing && g.down.in_flight() == 0) drop_ground(g, t);
  }

  for (auto& up : uavs_) up->core.on_tick(t);
  relay_.on_tick(t);
  for (auto& gp : grounds_) gp->core.on_tick(t);
  flush(t);
}

}  // namespace aqsim::telemetry
