#include "aqsim/telemetry/tcp.hpp"

#include <chrono>

#include "aqsim/common/error.hpp"

namespace aqsim::telemetry {

namespace {
constexpr int kPollMs = 20;
constexpr int kSendTimeoutMs = 2000;
}  // namespace

double unix_now_s() {
  using namespace std::chrono;
  return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count() / 1e6;
}

// ---- relay ----

TcpRelay::TcpRelay(RelayConfig cfg, Endpoint listen) : core_(std::move(cfg)), listener_(listen) {}

TcpRelay::~TcpRelay() { stop(); }

void TcpRelay::start() {
  if (running_.exchange(true)) return;
  acceptor_ = std::thread([this] { accept_loop(); });
  housekeeper_ = std::thread([this] { housekeeping_loop(); });
}

void TcpRelay::stop() {
  if (!running_.exchange(false)) return;
  if (acceptor_.joinable()) acceptor_.join();
  if (housekeeper_.joinable()) housekeeper_.join();
  listener_.close();
  std::map<ConnId, std::unique_ptr<Conn>> conns;
  {
    std::lock_guard lk(mu_);
    for (auto& [_, c] : conns_) c->sock.shutdown();
    conns.swap(conns_);
  }
  for (auto& [_, c] : conns) {
    if (c->reader.joinable()) c->reader.join();
  }
}

std::vector<std::string> TcpRelay::registered_uavs() const {
  std::lock_guard lk(mu_);
  return core_.registered_uavs();
}

void TcpRelay::flush_locked() {
  auto out = core_.take();
  for (auto& [id, bytes] : out.sends) {
    auto it = conns_.find(id);
    if (it == conns_.end() || it->second->done) continue;
    if (!it->second->sock.send_all(bytes)) it->second->sock.shutdown();
  }
  for (auto id : out.closes) {
    auto it = conns_.find(id);
    if (it != conns_.end()) it->second->sock.shutdown();
  }
}

void TcpRelay::accept_loop() {
  while (running_) {
    auto s = listener_.accept(100);
    if (!s) continue;
    s->set_send_timeout_ms(kSendTimeoutMs);
    std::lock_guard lk(mu_);
    const ConnId id = next_id_++;
    auto c = std::make_unique<Conn>();
    c->sock = std::move(*s);
    Conn* raw = c.get();
    conns_[id] = std::move(c);
    core_.on_open(id, unix_now_s());
    raw->reader = std::thread([this, id, raw] { read_loop(id, raw); });
  }
}

void TcpRelay::read_loop(ConnId id, Conn* c) {
  StreamDecoder dec;
  char buf[16384];
  bool open = true;
  while (running_ && open) {
    const auto n = c->sock.recv_some(buf, sizeof buf, 100);
    if (!n) continue;
    if (*n == 0) break;
    std::lock_guard lk(mu_);
    try {
      dec.feed(std::string_view(buf, *n));
      while (auto item = dec.next()) core_.on_item(id, *item, unix_now_s());
    } catch (const ParseError&) {
      open = false;
    }
    flush_locked();
  }
  std::lock_guard lk(mu_);
  c->done = true;
  core_.on_close(id, unix_now_s());
  flush_locked();
}

void TcpRelay::housekeeping_loop() {
  while (running_) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    std::lock_guard lk(mu_);
    core_.on_tick(unix_now_s());
    flush_locked();
    // reap finished readers
    for (auto it = conns_.begin(); it != conns_.end();) {
      if (it->second->done) {
        it->second->reader.join();
        it = conns_.erase(it);
      } else {
        ++it;
      }
    }
  }
}

// ---- UAV client ----

TcpUavClient::TcpUavClient(SessionConfig cfg, Endpoint relay, UavSessionCore::CommandHandler handler,
                           UavSessionCore::SnapshotSource snapshot)
    : relay_(std::move(relay)), core_(std::move(cfg), std::move(handler), std::move(snapshot)) {}

TcpUavClient::~TcpUavClient() { stop(); }

void TcpUavClient::start() {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this] { run(); });
}

void TcpUavClient::stop() {
  if (!running_.exchange(false)) return;
  if (thread_.joinable()) thread_.join();
}

bool TcpUavClient::link_ok() const {
  std::lock_guard lk(mu_);
  return core_.link_ok(unix_now_s());
}

UavSessionCore::Phase TcpUavClient::phase() const {
  std::lock_guard lk(mu_);
  return core_.phase();
}

UavSessionCore::Stats TcpUavClient::stats() const {
  std::lock_guard lk(mu_);
  return core_.stats();
}

std::string TcpUavClient::last_error() const {
  std::lock_guard lk(mu_);
  return core_.last_error();
}

void TcpUavClient::run() {
  Socket sock;
  StreamDecoder dec;
  char buf[16384];
  while (running_) {
    if (!sock.valid()) {
      bool attempt;
      {
        std::lock_guard lk(mu_);
        if (core_.phase() == UavSessionCore::Phase::Failed) {
          attempt = false;
        } else {
          attempt = core_.should_connect(unix_now_s());
        }
      }
      if (!attempt) {
        std::this_thread::sleep_for(std::chrono::milliseconds(kPollMs));
        continue;
      }
      try {
        sock = tcp_connect(relay_);
        sock.set_send_timeout_ms(kSendTimeoutMs);
        dec = StreamDecoder{};
        std::lock_guard lk(mu_);
        core_.on_connected(unix_now_s());
      } catch (const std::exception&) {
        std::lock_guard lk(mu_);
        core_.on_connect_failed(unix_now_s());
        continue;
      }
    }
    const auto n = sock.recv_some(buf, sizeof buf, kPollMs);
    std::lock_guard lk(mu_);
    const double now = unix_now_s();
    bool broken = n && *n == 0;
    if (n && *n > 0) {
      try {
        dec.feed(std::string_view(buf, *n));
        while (auto item = dec.next()) core_.on_line(item->line, now);
      } catch (const ParseError&) {
        broken = true;
      }
    }
    core_.on_tick(now);
    for (const auto& out : core_.take_outbox()) {
      if (!sock.send_all(out)) {
        broken = true;
        break;
      }
    }
    if (broken || core_.wants_close()) {
      sock.close();
      core_.on_disconnected(now);
    }
  }
  if (sock.valid()) {
    sock.close();
    std::lock_guard lk(mu_);
    core_.on_disconnected(unix_now_s());
  }
}

// ---- ground link ----

TcpGroundLink::TcpGroundLink(GroundLinkConfig cfg, Endpoint relay, GroundLinkCore::Handlers handlers)
    : relay_(std::move(relay)), core_(std::move(cfg), [this, h = std::move(handlers)]() mutable {
        // wake dispatch() waiters whenever a command settles
        auto user = h.command_done;
        h.command_done = [this, user](const DispatchResult& r) {
          if (user) user(r);
          cv_.notify_all();
        };
        return h;
      }()) {}

TcpGroundLink::~TcpGroundLink() { stop(); }

void TcpGroundLink::start() {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this] { run(); });
}

void TcpGroundLink::stop() {
  if (!running_.exchange(false)) return;
  if (thread_.joinable()) thread_.join();
  cv_.notify_all();
}

bool TcpGroundLink::uav_connected(const std::string& uav_id) const {
  std::lock_guard lk(mu_);
  return core_.uav_connected(uav_id);
}

std::vector<std::string> TcpGroundLink::connected_uavs() const {
  std::lock_guard lk(mu_);
  return core_.connected_uavs();
}

GroundLinkCore::Phase TcpGroundLink::phase() const {
  std::lock_guard lk(mu_);
  return core_.phase();
}

bool TcpGroundLink::wait_ready(double timeout_s) const {
  std::unique_lock lk(mu_);
  return cv_.wait_for(lk, std::chrono::duration<double>(timeout_s),
                      [&] { return core_.phase() == GroundLinkCore::Phase::Ready; });
}

void TcpGroundLink::flush_locked() {
  if (!sock_.valid()) {
    core_.take_outbox();
    return;
  }
  for (const auto& out : core_.take_outbox()) {
    if (!sock_.send_all(out)) {
      sock_.shutdown();
      break;
    }
  }
}

DispatchResult TcpGroundLink::dispatch(const std::string& uav_id, Command cmd) {
  std::unique_lock lk(mu_);
  const auto seq = core_.dispatch(uav_id, std::move(cmd), unix_now_s());
  flush_locked();
  cv_.wait(lk, [&] {
    const auto r = core_.result(seq);
    return !running_ || (r && r->status != DispatchStatus::Pending);
  });
  auto r = core_.result(seq);
  if (!r || r->status == DispatchStatus::Pending) return {DispatchStatus::DeliveryUnknown, seq, uav_id, "link stopped"};
  return *r;
}

void TcpGroundLink::run() {
  StreamDecoder dec;
  char buf[16384];
  while (running_) {
    if (!sock_.valid()) {
      bool attempt;
      {
        std::lock_guard lk(mu_);
        core_.on_tick(unix_now_s());  // still expire pending commands while offline
        attempt = core_.phase() != GroundLinkCore::Phase::Failed && core_.should_connect(unix_now_s());
      }
      if (!attempt) {
        std::this_thread::sleep_for(std::chrono::milliseconds(kPollMs));
        continue;
      }
      Socket s;
      try {
        s = tcp_connect(relay_);
        s.set_send_timeout_ms(kSendTimeoutMs);
      } catch (const std::exception&) {
        std::lock_guard lk(mu_);
        core_.on_connect_failed(unix_now_s());
        continue;
      }
      std::lock_guard lk(mu_);
      sock_ = std::move(s);
      dec = StreamDecoder{};
      core_.on_connected(unix_now_s());
      flush_locked();
    }
    const auto n = sock_.recv_some(buf, sizeof buf, kPollMs);
    std::lock_guard lk(mu_);
    const double now = unix_now_s();
    bool broken = n && *n == 0;
    if (n && *n > 0) {
      try {
        dec.feed(std::string_view(buf, *n));
        while (auto item = dec.next()) core_.on_item(*item, now);
      } catch (const ParseError&) {
        broken = true;
      }
    }
    core_.on_tick(now);
    flush_locked();
    if (core_.phase() == GroundLinkCore::Phase::Ready) cv_.notify_all();
    if (broken || core_.wants_close()) {
      sock_.close();
      core_.on_disconnected(now);
    }
  }
  std::lock_guard lk(mu_);
  if (sock_.valid()) {
    sock_.close();
    core_.on_disconnected(unix_now_s());
  }
  cv_.notify_all();
}

}  // namespace aqsim::telemetry
