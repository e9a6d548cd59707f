#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <thread>

#include "aqsim/common/error.hpp"
#include "aqsim/common/random.hpp"
#include "aqsim/telemetry/ground_link.hpp"
#include "aqsim/telemetry/link_sim.hpp"
#include "aqsim/telemetry/nmea.hpp"
#include "aqsim/telemetry/protocol.hpp"
#include "aqsim/telemetry/relay.hpp"
#include "aqsim/telemetry/sim_network.hpp"
#include "aqsim/telemetry/tcp.hpp"
#include "aqsim/telemetry/uav_session.hpp"

using namespace aqsim;
using namespace aqsim::telemetry;
using sensors::SensorFrame;

namespace {

constexpr double kT0 = 1'760'000'000.0;  // 2025-10-09, arbitrary fixed epoch

// Fixed-point rendering built from integer arithmetic only.
std::string fixed(std::int64_t k, int decimals) {
  if (decimals == 0) return std::to_string(k);
  std::int64_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const bool neg = k < 0;
  const std::uint64_t a = neg ? static_cast<std::uint64_t>(-k) : static_cast<std::uint64_t>(k);
  std::string frac = std::to_string(a % scale);
  frac.insert(0, decimals - frac.size(), '0');
  return (neg ? "-" : "") + std::to_string(a / scale) + "." + frac;
}

std::int64_t rand_int(Rng& r, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(r.next() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::uint8_t xor_oracle(const std::string& s) {
  std::uint8_t x = 0;
  const auto a = s.find('$'), b = s.find('*');
  for (auto i = a + 1; i < b; ++i) x = static_cast<std::uint8_t>(x ^ static_cast<unsigned char>(s[i]));
  return x;
}

std::string with_checksum(const std::string& body) {
  char hex[4];
  std::snprintf(hex, sizeof hex, "%02X", xor_oracle("$" + body + "*"));
  return "$" + body + "*" + hex;
}

}  // namespace

TEST_CASE("encode_frame reproduces the recorded baseline row") {
  const SensorFrame f{41.40, 23.40, 0.62, 0, 0, 0, 0, 0};
  const auto line = encode_frame(f, {0, 0, 0}, from_unix_ms(0));
  CHECK(line == "D 1970-01-01T00:00:00.000Z 0.0000000 0.0000000 0.00 41.40 23.40 0.62 0.00 0.00 0 0 0\n");
  CHECK(line.find("41.40 23.40 0.62 0.00 0.00 0 0 0") != std::string::npos);

  const auto zero = encode_frame(SensorFrame{}, {0, 0, 0}, from_unix_ms(0));
  const auto d = decode_frame(zero);
  CHECK(d.frame == SensorFrame{});

  auto back = decode_frame("D 2021-06-01T10:00:00.000Z 30.0444000 31.2357000 120.00 41.40 23.40 0.62 0.00 0.00 0 0 0");
  CHECK(back.frame == SensorFrame{41.40, 23.40, 0.62, 0, 0, 0, 0, 0});
  CHECK(back.pos == Position{30.0444, 31.2357, 120.0});
  CHECK(to_unix_ms(back.ts) == 1622541600000);
}

TEST_CASE("recorded serial rows survive a framing round trip") {
  // rows as printed by the sensor board, including the raw negative counts
  const char* rows[] = {
      "41.90 23.50 0.62 0.00 0.00 -18971 5603 -19303", "41.70 23.40 15815.60 0.00 2.15 -31520 16125 -20729",
      "41.70 23.40 15815.60 1.00 0.52 -5462 13956 1660", "41.70 23.40 0.62 0.00 0.01 76 7 30"};
  for (const char* r : rows) {
    const std::string line = std::string("D 2021-06-01T10:00:00.000Z 1.0000000 2.0000000 3.00 ") + r + "\n";
    CHECK(encode(decode(line)) == line);
  }
}

TEST_CASE("frame round trip over the quantised grid") {
  Rng rng(7);
  for (int i = 0; i < 100000; ++i) {
    DataLine d;
    d.ts = from_unix_ms(rand_int(rng, 0, 4'102'444'800'000LL));
    d.pos.lat = static_cast<double>(rand_int(rng, -900'000'000, 900'000'000)) / 1e7;
    d.pos.lon = static_cast<double>(rand_int(rng, -1'800'000'000, 1'800'000'000)) / 1e7;
    d.pos.alt = static_cast<double>(rand_int(rng, -50'000, 1'000'000)) / 100;
    d.frame.humidity = static_cast<double>(rand_int(rng, 0, 10'000)) / 100;
    d.frame.temp = static_cast<double>(rand_int(rng, -4'000, 8'000)) / 100;
    d.frame.dust = static_cast<double>(rand_int(rng, 0, 2'000'000)) / 100;
    d.frame.o3 = static_cast<double>(rand_int(rng, 0, 100'000)) / 100;
    d.frame.co2 = static_cast<double>(rand_int(rng, 0, 1'000'000)) / 100;
    d.frame.co = static_cast<double>(rand_int(rng, -40'000, 40'000));
    d.frame.lpg = static_cast<double>(rand_int(rng, -40'000, 40'000));
    d.frame.smoke = static_cast<double>(rand_int(rng, -40'000, 40'000));
    d.frame.valid = rng.bernoulli(0.5);
    const auto back = decode_frame(encode_frame(d.frame, d.pos, d.ts));
    REQUIRE(back == d);
  }
}

TEST_CASE("randomised valid lines decode and re-encode to the same text") {
  Rng rng(11);
  for (int i = 0; i < 20000; ++i) {
    std::string line = "D " + format_iso8601(from_unix_ms(rand_int(rng, 0, 4'102'444'800'000LL)));
    line += ' ' + fixed(rand_int(rng, -900'000'000, 900'000'000), 7);
    line += ' ' + fixed(rand_int(rng, -1'800'000'000, 1'800'000'000), 7);
    for (int k = 0; k < 6; ++k) line += ' ' + fixed(rand_int(rng, -100'000, 1'000'000), 2);
    for (int k = 0; k < 3; ++k) line += ' ' + fixed(rand_int(rng, -40'000, 40'000), 0);
    if (rng.bernoulli(0.3)) line += " W";
    line += '\n';
    if (line.find("-0.00 ") != std::string::npos || line.find(" -0 ") != std::string::npos) continue;
    REQUIRE(encode(decode(line)) == line);
  }
  // non-finite quantities are not representable on the wire
  CHECK_THROWS_AS(encode_frame(SensorFrame{NAN, 0, 0, 0, 0, 0, 0, 0}, {}, from_unix_ms(0)), DomainError);
}

TEST_CASE("frame parse errors carry offsets") {
  const std::string good = "D 2021-06-01T10:00:00.000Z 1.0000000 2.0000000 3.00 41.40 23.40 0.62 0.00 0.00 0 0 0";
  CHECK_NOTHROW(decode_frame(good + "  \t\r\n"));

  const std::string seven = "D 2021-06-01T10:00:00.000Z 1.0 2.0 3.0 41.40 23.40 0.62";
  CHECK_THROWS_AS(decode_frame(seven), ParseError);
  try {
    decode_frame("D 2021-06-01T10:00:00.000Z 1.0000000 2.0000000 3.00 41.40 abc 0.62 0.00 0.00 0 0 0");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == good.find("23.40"));
  }
  try {
    decode_frame("X" + good.substr(1));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 0);
  }
  CHECK_THROWS_AS(decode_frame(good + " 5"), ParseError);
  CHECK_THROWS_AS(decode_frame(good.substr(0, 30) + ' ' + good.substr(30)), ParseError);  // double space
}

TEST_CASE("message variants round trip") {
  std::vector<Message> ms = {
      Command{1, CommandKind::StartData, {}, {}},
      Command{2, CommandKind::SetMode, mission::FlightMode::ReturnToBase, {}},
      Command{3, CommandKind::UploadMission, {}, R"({"waypoints":[]})"},
      Command{4, CommandKind::Rtb, {}, {}},
      Ack{5, true, ""},
      Ack{6, false, "invalid transition MANUAL -> LOITER"},
      Heartbeat{1'700'000'000'123},
      VideoHeader{9, 1'700'000'000'000, 1024},
  };
  StatusLine st;
  st.ts = from_unix_ms(1'700'000'000'000);
  st.mode = mission::FlightMode::AutoMission;
  st.status = mission::VehicleStatus::Airborne;
  st.pos = {30.1, 31.2, 100};
  st.heading_deg = 90.5;
  st.airspeed_mps = 12.25;
  st.battery_mah = 3120.5;
  st.throttle_pct = 55;
  st.link_ok = false;
  st.target_index = 3;
  ms.push_back(st);
  for (const auto& m : ms) CHECK(decode(encode(m)) == m);

  CHECK_THROWS_AS(decode("C 7 LAUNCH"), ParseError);
  CHECK_THROWS_AS(decode("C 7 SET_MODE"), ParseError);
  CHECK_THROWS_AS(decode("Q 1"), ParseError);

  const Hello uh{Hello::Role::Uav, "uav-7", "tok", 1};
  CHECK(decode_hello(encode_hello(uh)) == uh);
  const Hello gh{Hello::Role::Ground, "", "tok", 1};
  CHECK(decode_hello(encode_hello(gh)) == gh);
  CHECK_FALSE(valid_identifier(""));
  CHECK_FALSE(valid_identifier("a b"));
  CHECK_FALSE(valid_identifier(std::string(65, 'a')));
  CHECK(valid_identifier("UAV_01.a-b"));

  const auto env = unwrap(wrap("uav-1", "A 3 OK"));
  CHECK(env.uav_id == "uav-1");
  CHECK(env.inner == "A 3 OK");
}

TEST_CASE("stream decoder reassembles split input") {
  const std::string payload = synthetic_video_payload(3, 40);
  CHECK(payload.size() == 40);
  CHECK(payload == synthetic_video_payload(3, 40));
  const std::string stream = "H 1\n" + encode(VideoHeader{3, 5, payload.size()}) + payload + "A 1 OK\nU u V 1 2 3\nxyz";
  StreamDecoder dec;
  std::vector<StreamDecoder::Item> items;
  for (char c : stream) {
    dec.feed(std::string_view(&c, 1));
    while (auto it = dec.next()) items.push_back(*it);
  }
  REQUIRE(items.size() == 4);
  CHECK(items[0].line == "H 1");
  CHECK(items[1].payload == payload);
  CHECK(items[2].line == "A 1 OK");
  CHECK(items[3].payload == "xyz");
  CHECK(dec.buffered() == 0);

  StreamDecoder big;
  big.feed(std::string(kMaxLineBytes + 1, 'a'));
  CHECK_THROWS_AS(big.next(), ParseError);
  StreamDecoder huge;
  CHECK_THROWS_AS(
      {
        huge.feed("V 1 1 " + std::to_string(kMaxVideoBytes + 1) + "\n");
        huge.next();
      },
      ParseError);
}

TEST_CASE("canonical GGA sentence") {
  const std::string s = "$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*47";
  REQUIRE(xor_oracle(s) == 0x47);
  CHECK(nmea_checksum(s.substr(1, s.size() - 4)) == 0x47);
  const auto fix = parse_nmea(s + "\r\n");
  CHECK(fix.lat == doctest::Approx(48 + 7.038 / 60).epsilon(1e-12));
  CHECK(fix.lon == doctest::Approx(11 + 31.000 / 60).epsilon(1e-12));
  CHECK(std::round(fix.lat * 1e4) / 1e4 == doctest::Approx(48.1173));
  CHECK(std::round(fix.lon * 1e4) / 1e4 == doctest::Approx(11.5167));
  CHECK(fix.alt == doctest::Approx(545.4));
  CHECK(fix.utc_time_s == doctest::Approx(12 * 3600 + 35 * 60 + 19));
  CHECK(fix.fix_quality == 1);
  CHECK(fix.satellites == 8);

  const auto rmc = parse_nmea("$GPRMC,123519,A,4807.038,N,01131.000,E,022.4,084.4,230394,003.1,W*6A");
  CHECK(rmc.lat == doctest::Approx(48 + 7.038 / 60).epsilon(1e-12));
  CHECK(rmc.speed_knots == doctest::Approx(22.4));
  CHECK(rmc.course_deg == doctest::Approx(84.4));
  CHECK(rmc.fix_quality == 1);

  CHECK(parse_nmea(with_checksum("GNGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,")).lat ==
        doctest::Approx(fix.lat));
}

TEST_CASE("NMEA hemispheres and errors") {
  const auto sw = parse_nmea(with_checksum("GPGGA,000001,3351.000,S,15112.000,W,1,05,1.0,10.0,M,0.0,M,,"));
  CHECK(sw.lat == doctest::Approx(-(33 + 51.0 / 60)));
  CHECK(sw.lon == doctest::Approx(-(151 + 12.0 / 60)));
  CHECK(nmea_to_degrees("00030.000", 'W') == doctest::Approx(-0.5));

  auto kind_of = [](const std::string& s) {
    try {
      parse_nmea(s);
    } catch (const NmeaError& e) {
      return e.kind();
    }
    FAIL("expected NmeaError");
    return NmeaError::Kind::Malformed;
  };
  CHECK(kind_of("$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*48") == NmeaError::Kind::Checksum);
  CHECK(kind_of("$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,") == NmeaError::Kind::Checksum);
  CHECK(kind_of("$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*4f") == NmeaError::Kind::Checksum);
  CHECK(kind_of(with_checksum("GPGSV,3,1,11,03,03,111,00")) == NmeaError::Kind::Unsupported);
  CHECK(kind_of(with_checksum("GPGGA,123519,48x7.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,")) ==
        NmeaError::Kind::Malformed);
  CHECK(kind_of(with_checksum("GPGGA,123519,4807.038,Q,01131.000,E,1,08,0.9,545.4,M,46.9,M,,")) ==
        NmeaError::Kind::Malformed);
  CHECK(kind_of(with_checksum("GPGGA,123519,4807.038,N")) == NmeaError::Kind::Malformed);
}

TEST_CASE("every single-byte mutation of a sentence is rejected") {
  Rng rng(5);
  std::size_t mutations = 0, rejected = 0;
  for (int i = 0; i < 300; ++i) {
    GpsFix f;
    f.lat = rng.uniform(-89, 89);
    f.lon = rng.uniform(-179, 179);
    f.alt = std::round(rng.uniform(0, 2000) * 10) / 10;
    f.utc_time_s = static_cast<double>(rand_int(rng, 0, 86399));
    f.fix_quality = 1;
    f.satellites = static_cast<int>(rand_int(rng, 4, 12));
    const std::string s = i % 2 ? format_gga(f) : format_rmc(f);
    REQUIRE_NOTHROW(parse_nmea(s));
    const auto back = parse_nmea(s);
    CHECK(std::abs(back.lat - f.lat) < 1e-6);  // 1e-4 minute resolution
    CHECK(std::abs(back.lon - f.lon) < 1e-6);
    for (std::size_t pos = 0; pos < s.size(); ++pos) {
      for (int k = 0; k < 3; ++k) {
        std::string m = s;
        char c;
        do c = static_cast<char>(rng.next() & 0xff);
        while (c == s[pos]);
        m[pos] = c;
        ++mutations;
        try {
          parse_nmea(m);
        } catch (const ParseError&) {
          ++rejected;
        }
      }
    }
  }
  CHECK(mutations > 50000);
  CHECK(rejected == mutations);
}

TEST_CASE("ideal link is the identity channel") {
  LinkChannel<int> ch(LinkConfig::ideal(), Rng(1));
  for (int i = 0; i < 100; ++i) {
    REQUIRE(ch.send(i, i * 10.0));
    const auto d = ch.poll(i * 10.0);
    REQUIRE(d.size() == 1);
    CHECK(d[0].payload == i);
    CHECK(d[0].at_ms == i * 10.0);
  }
  LinkConfig bad;
  bad.base_delay_min_ms = -1;
  bad.spike_probability = 2;
  CHECK(validate(bad).size() == 2);
  LinkConfig lossy = LinkConfig::ideal();
  lossy.loss_rate = 1.0;
  LinkChannel<int> dead(lossy, Rng(1));
  CHECK_FALSE(dead.send(1, 0));
  CHECK(dead.lost() == 1);
}

TEST_CASE("default link delay statistics") {
  const LinkConfig cfg;
  const int n = 10000;
  LinkChannel<int> ch(cfg, Rng(cfg.seed));
  for (int i = 0; i < n; ++i) REQUIRE(ch.send(i, i * 100.0));
  std::vector<LinkChannel<int>::Delivery> got;
  for (double t = 0; got.size() < static_cast<std::size_t>(n); t += 1.0) {
    for (auto& d : ch.poll(t)) got.push_back(d);
  }
  double sum = 0, mx = 0, base_sum = 0;
  int base_n = 0;
  for (int i = 0; i < n; ++i) {
    REQUIRE(got[i].payload == i);  // count and order preserved
    if (i) REQUIRE(got[i].at_ms >= got[i - 1].at_ms);
    sum += got[i].delay_ms;
    mx = std::max(mx, got[i].delay_ms);
    if (got[i].delay_ms < cfg.spike_delay_ms) {
      base_sum += got[i].delay_ms;
      ++base_n;
    }
  }
  // closed-form moments of uniform base delay plus Bernoulli spike
  const double range = cfg.base_delay_max_ms - cfg.base_delay_min_ms;
  const double mu = (cfg.base_delay_min_ms + cfg.base_delay_max_ms) / 2 + cfg.spike_probability * cfg.spike_delay_ms;
  const double var = range * range / 12 +
                     cfg.spike_delay_ms * cfg.spike_delay_ms * cfg.spike_probability * (1 - cfg.spike_probability);
  const double three_sigma = 3 * std::sqrt(var / n);
  CHECK(std::abs(sum / n - mu) <= three_sigma);
  CHECK(sum / n >= cfg.base_delay_min_ms - three_sigma);
  CHECK(sum / n <= cfg.base_delay_max_ms + three_sigma);
  CHECK(std::abs(base_sum / base_n - 30.0) <= 3 * std::sqrt(range * range / 12 / base_n));
  CHECK(mx >= cfg.spike_delay_ms);

  // same seed, same schedule
  LinkChannel<int> a(cfg, Rng(99)), b(cfg, Rng(99));
  for (int i = 0; i < 1000; ++i) {
    a.send(i, i);
    b.send(i, i);
  }
  const auto da = a.poll(1e9), db = b.poll(1e9);
  REQUIRE(da.size() == db.size());
  for (std::size_t i = 0; i < da.size(); ++i) CHECK(da[i].at_ms == db[i].at_ms);
}

TEST_CASE("link ordering holds for any delay distribution") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    LinkConfig cfg;
    cfg.base_delay_min_ms = rng.uniform(0, 100);
    cfg.base_delay_max_ms = cfg.base_delay_min_ms + rng.uniform(0, 500);
    cfg.spike_probability = rng.uniform(0, 0.5);
    cfg.spike_delay_ms = rng.uniform(0, 3000);
    LinkChannel<int> ch(cfg, rng.fork());
    int expect = 0;
    const int n = 500;
    double t = 0;
    for (int i = 0; i < n; ++i) {
      ch.send(i, t);
      t += rng.uniform(0, 20);
      for (auto& d : ch.poll(t)) CHECK(d.payload == expect++);
    }
    for (auto& d : ch.poll(1e12)) CHECK(d.payload == expect++);
    CHECK(expect == n);
  }
}

// ---------------------------------------------------------------------------
// session / relay / ground link, sans-IO through the simulated network

namespace {

struct Rig {
  struct Uav {
    std::string id;
    std::vector<Command> executed;
    SensorFrame frame;
  };
  explicit Rig(LinkConfig link = LinkConfig::ideal()) : net(make_cfg(link), kT0) {}
  static SimNetwork::Config make_cfg(LinkConfig link) {
    SimNetwork::Config c;
    c.uav_link = link;
    return c;
  }

  std::size_t add_uav(SessionConfig cfg, std::vector<Outage> outages = {}) {
    auto u = std::make_unique<Uav>();
    u->id = cfg.uav_id;
    u->frame = SensorFrame{10.0 + static_cast<double>(uavs.size()), 20, 0.5, 0, 400, 1, 2, 3};
    Uav* raw = u.get();
    uavs.push_back(std::move(u));
    return net.add_uav(
        std::move(cfg),
        [raw](const Command& c) {
          raw->executed.push_back(c);
          return Ack{c.seq, true, ""};
        },
        [raw] {
          UavSnapshot s;
          s.frame = raw->frame;
          s.gps = Position{30, 31, 100};
          return s;
        },
        std::move(outages));
  }

  void add_ground(GroundLinkConfig cfg = {}) {
    GroundLinkCore::Handlers h;
    h.data = [this](const std::string& u, const DataLine& d, double now) { data.push_back({u, d, now}); };
    h.video = [this](const std::string& u, const VideoHeader& v, const std::string& payload, double now) {
      video.push_back({u, v, payload.size(), now});
    };
    h.presence = [this](const std::string& u, bool up, double) { presence.emplace_back(u, up); };
    h.bad_line = [this](const std::string&, const std::string& line, const std::string&) { bad.push_back(line); };
    net.add_ground(std::move(cfg), std::move(h));
  }

  GroundLinkCore& ground() { return net.ground(0); }

  // dispatch and run the network until the command settles
  DispatchResult run_command(const std::string& uav, Command c, double limit_s = 20) {
    const auto seq = ground().dispatch(uav, std::move(c), net.now());
    const double until = net.now() + limit_s;
    while (net.now() < until) {
      auto r = ground().result(seq);
      if (r && r->status != DispatchStatus::Pending) return *r;
      net.advance_by(0.01);
    }
    return *ground().result(seq);
  }

  std::size_t data_from(const std::string& uav) const {
    return static_cast<std::size_t>(
        std::count_if(data.begin(), data.end(), [&](const auto& d) { return d.uav == uav; }));
  }

  struct Data {
    std::string uav;
    DataLine line;
    double at;
  };
  struct Video {
    std::string uav;
    VideoHeader h;
    std::size_t bytes;
    double at;
  };
  SimNetwork net;
  std::vector<std::unique_ptr<Uav>> uavs;
  std::vector<Data> data;
  std::vector<Video> video;
  std::vector<std::pair<std::string, bool>> presence;
  std::vector<std::string> bad;
};

SessionConfig uav_cfg(const std::string& id) {
  SessionConfig c;
  c.uav_id = id;
  return c;
}

Command cmd(CommandKind k) { return Command{0, k, {}, {}}; }

}  // namespace

TEST_CASE("handshake and registration") {
  Rig rig;
  rig.add_uav(uav_cfg("alpha"));
  rig.add_ground();
  rig.net.advance_by(1.0);
  CHECK(rig.net.uav(0).phase() == UavSessionCore::Phase::Ready);
  CHECK(rig.ground().phase() == GroundLinkCore::Phase::Ready);
  CHECK(rig.ground().uav_connected("alpha"));
  CHECK(rig.net.relay().is_registered("alpha"));
  CHECK(rig.net.uav(0).link_ok(rig.net.now()));
  REQUIRE_FALSE(rig.presence.empty());
  CHECK(rig.presence.back() == std::make_pair(std::string("alpha"), true));
  // heartbeats keep everything up without any traffic
  rig.net.advance_by(30.0);
  CHECK(rig.net.uav_link_stats(0).disconnects == 0);
  CHECK(rig.net.uav(0).link_ok(rig.net.now()));
  CHECK(rig.bad.empty());
}

TEST_CASE("rejected sessions") {
  SUBCASE("wrong token fails permanently") {
    Rig rig;
    auto c = uav_cfg("alpha");
    c.token = "nope";
    rig.add_uav(c);
    rig.net.advance_by(10.0);
    CHECK(rig.net.uav(0).phase() == UavSessionCore::Phase::Failed);
    CHECK(rig.net.uav(0).last_error().find("auth-failed") != std::string::npos);
    CHECK(rig.net.uav(0).stats().connects == 0);         // never became ready
    CHECK(rig.net.relay().stats().rejected_hellos == 1);  // and did not retry
  }
  SUBCASE("duplicate id is refused while the first holds it") {
    Rig rig;
    rig.add_uav(uav_cfg("alpha"));
    rig.add_uav(uav_cfg("alpha"));
    rig.net.advance_by(3.0);
    CHECK(rig.net.relay().registered_uavs().size() == 1);
    CHECK(rig.net.uav(0).phase() == UavSessionCore::Phase::Ready);
    CHECK(rig.net.uav(1).phase() != UavSessionCore::Phase::Ready);
    CHECK(rig.net.uav(1).phase() != UavSessionCore::Phase::Failed);  // keeps retrying
  }
  SUBCASE("relay answers bad hellos") {
    RelayCore relay;
    auto reply = [&](ConnId id, const std::string& line) {
      relay.on_open(id, kT0);
      relay.on_item(id, {line, ""}, kT0);
      auto out = relay.take();
      REQUIRE_FALSE(out.sends.empty());
      return out.sends.front().second;
    };
    CHECK(reply(1, "HELLO UAV a aqsim 2").rfind("ERR version-mismatch", 0) == 0);
    CHECK(reply(2, "HELLO UAV a wrong 1").rfind("ERR auth-failed", 0) == 0);
    CHECK(reply(3, "GET / HTTP/1.1").rfind("ERR bad-hello", 0) == 0);
    CHECK(reply(4, "HELLO UAV a aqsim 1") == "OK 1\n");
    CHECK(reply(5, "HELLO UAV a aqsim 1").rfind("ERR duplicate-id", 0) == 0);
    CHECK(relay.stats().rejected_hellos == 4);
  }
}

TEST_CASE("relay routes commands and reports absent UAVs") {
  RelayCore relay;
  relay.on_open(1, kT0);
  relay.on_item(1, {"HELLO GROUND aqsim 1", ""}, kT0);
  relay.on_open(2, kT0);
  relay.on_item(2, {"HELLO UAV a aqsim 1", ""}, kT0);
  relay.take();
  relay.on_item(1, {"U ghost C 5 RTB", ""}, kT0);
  relay.on_item(1, {"U a C 6 RTB", ""}, kT0);
  relay.on_item(1, {"garbage", ""}, kT0);
  relay.on_item(2, {"A 6 OK", ""}, kT0);
  auto out = relay.take();
  std::vector<std::pair<ConnId, std::string>> expect = {
      {1, "U ghost E 5 not-connected\n"}, {2, "C 6 RTB\n"}, {1, "ERR bad-line expected 'U <uav_id> <message>'\n"},
      {1, "U a A 6 OK\n"}};
  CHECK(out.sends == expect);
  relay.on_close(2, kT0);
  out = relay.take();
  REQUIRE(out.sends.size() == 1);
  CHECK(out.sends[0].second == "U a X\n");
  CHECK(relay.stats().not_connected == 1);
}

TEST_CASE("START_DATA streams one line per period, STOP_DATA halts it") {
  for (double window : {0.5, 1.5, 2.5, 5.5, 9.5}) {
    CAPTURE(window);
    Rig rig;
    rig.add_uav(uav_cfg("alpha"));
    rig.add_ground();
    rig.net.advance_by(1.0);
    const auto r = rig.run_command("alpha", cmd(CommandKind::StartData));
    REQUIRE(r.status == DispatchStatus::Acked);
    const double acked = rig.net.now();
    rig.net.advance_to(acked + window);
    // counting oracle: first line one period after receipt
    CHECK(rig.data.size() == static_cast<std::size_t>(std::floor(window / 1.0)));
    if (window == 5.5) {
      for (const auto& d : rig.data) {
        CHECK(d.uav == "alpha");
        CHECK(d.line.frame == quantize(DataLine{{}, {}, rig.uavs[0]->frame}).frame);
      }
      const auto s = rig.run_command("alpha", cmd(CommandKind::StopData));
      REQUIRE(s.status == DispatchStatus::Acked);
      const auto before = rig.data.size();
      rig.net.advance_by(2.0);
      CHECK(rig.data.size() == before);
      CHECK_FALSE(rig.net.uav(0).data_enabled());
    }
  }
}

TEST_CASE("SET_MODE reaches the UAV and the ack carries its seq") {
  Rig rig(LinkConfig{});
  rig.add_uav(uav_cfg("alpha"));
  rig.add_ground();
  rig.net.advance_by(1.0);
  Command c = cmd(CommandKind::SetMode);
  c.mode = mission::FlightMode::AutoTakeoff;
  const auto r = rig.run_command("alpha", c);
  CHECK(r.status == DispatchStatus::Acked);
  CHECK(r.uav_id == "alpha");
  REQUIRE(rig.uavs[0]->executed.size() == 1);
  CHECK(rig.uavs[0]->executed[0].seq == r.seq);
  CHECK(rig.uavs[0]->executed[0].mode == mission::FlightMode::AutoTakeoff);

  const auto ghost = rig.run_command("ghost", cmd(CommandKind::Rtb));
  CHECK(ghost.status == DispatchStatus::NotConnected);
  CHECK(to_string(ghost.status) == "not-connected");
}

TEST_CASE("two UAVs are multiplexed without cross-talk") {
  Rig rig(LinkConfig{});
  rig.add_uav(uav_cfg("alpha"));
  rig.add_uav(uav_cfg("bravo"));
  rig.add_ground();
  rig.net.advance_by(1.0);
  REQUIRE(rig.run_command("alpha", cmd(CommandKind::StartData)).status == DispatchStatus::Acked);
  REQUIRE(rig.run_command("bravo", cmd(CommandKind::StartData)).status == DispatchStatus::Acked);

  // interleaved commands to random targets
  Rng rng(21);
  std::map<std::uint64_t, std::string> target;
  for (int i = 0; i < 200; ++i) {
    const std::string who = rng.bernoulli(0.5) ? "alpha" : "bravo";
    const auto seq = rig.ground().dispatch(who, cmd(CommandKind::Rtb), rig.net.now());
    target[seq] = who;
    rig.net.advance_by(rng.uniform(0, 0.05));
  }
  rig.net.advance_by(5.0);
  for (const auto& [seq, who] : target) {
    const auto r = rig.ground().result(seq);
    REQUIRE(r);
    CHECK(r->status == DispatchStatus::Acked);
    CHECK(r->uav_id == who);
  }
  for (std::size_t u = 0; u < 2; ++u) {
    for (const auto& c : rig.uavs[u]->executed) {
      if (c.kind == CommandKind::Rtb) CHECK(target.at(c.seq) == rig.uavs[u]->id);
    }
  }
  CHECK(rig.uavs[0]->executed.size() + rig.uavs[1]->executed.size() == 200);  // START_DATA stays in the session
  for (const auto& d : rig.data) {
    CHECK(d.line.frame.humidity == (d.uav == "alpha" ? 10.0 : 11.0));
  }
  CHECK(rig.data_from("alpha") > 0);
  CHECK(rig.data_from("bravo") > 0);
}

TEST_CASE("lossless link: frames received equal frames sent") {
  Rig rig(LinkConfig{});
  rig.add_uav(uav_cfg("alpha"));
  rig.add_ground();
  rig.net.advance_by(1.0);
  REQUIRE(rig.run_command("alpha", cmd(CommandKind::StartData)).status == DispatchStatus::Acked);
  rig.net.advance_by(120.0);
  REQUIRE(rig.run_command("alpha", cmd(CommandKind::StopData)).status == DispatchStatus::Acked);
  rig.net.advance_by(5.0);
  CHECK(rig.net.uav(0).stats().data_lines > 100);
  CHECK(rig.data.size() == rig.net.uav(0).stats().data_lines);
}

TEST_CASE("outage below and above the link timeout") {
  Rig rig;
  rig.add_uav(uav_cfg("alpha"), {{10.0, 13.0}});
  rig.add_ground();
  rig.net.advance_to(kT0 + 9.9);
  CHECK(rig.net.uav(0).link_ok(rig.net.now()));
  rig.net.advance_to(kT0 + 10.5);
  CHECK_FALSE(rig.net.uav(0).link_ok(rig.net.now()));
  CHECK_FALSE(rig.net.uav_connected(0));
  rig.net.advance_to(kT0 + 20.0);
  CHECK(rig.net.uav(0).link_ok(rig.net.now()));
  CHECK(rig.net.uav(0).stats().connects == 2);
  CHECK(rig.ground().uav_connected("alpha"));
  // presence went down and back up exactly once
  std::vector<std::pair<std::string, bool>> expect = {{"alpha", true}, {"alpha", false}, {"alpha", true}};
  CHECK(rig.presence == expect);
}

TEST_CASE("commands execute exactly once under reconnection fuzzing") {
  LinkConfig link;
  link.loss_rate = 0.02;  // each loss breaks the connection
  link.spike_probability = 0.02;
  link.seed = 1234;
  Rig rig(link);
  std::vector<Outage> outages;
  for (double t = 20; t < 400; t += 37) outages.push_back({t, t + 2.5});
  rig.add_uav(uav_cfg("alpha"), outages);
  GroundLinkConfig gc;
  gc.command_timeout_s = 1.0;  // provoke delivery-unknown while spikes hold acks
  rig.add_ground(gc);
  rig.net.advance_by(2.0);

  std::set<std::uint64_t> seqs;
  int retries = 0, unknown = 0;
  for (int i = 0; i < 150; ++i) {
    std::uint64_t seq = 0;
    for (int attempt = 0; attempt < 100; ++attempt) {
      Command c = cmd(CommandKind::Rtb);
      c.seq = seq;
      seq = rig.ground().dispatch("alpha", c, rig.net.now());
      DispatchResult r;
      do {
        rig.net.advance_by(0.01);
        r = *rig.ground().result(seq);
      } while (r.status == DispatchStatus::Pending);
      if (r.status == DispatchStatus::Acked) break;
      if (r.status == DispatchStatus::DeliveryUnknown) ++unknown;
      ++retries;
      rig.net.advance_by(0.5);
    }
    REQUIRE(rig.ground().result(seq)->status == DispatchStatus::Acked);
    seqs.insert(seq);
    rig.net.advance_by(0.3);
  }
  const auto& exec = rig.uavs[0]->executed;
  std::map<std::uint64_t, int> count;
  for (const auto& c : exec) ++count[c.seq];
  CHECK(count.size() == seqs.size());
  for (const auto& [seq, n] : count) {
    CAPTURE(seq);
    CHECK(n == 1);
    CHECK(seqs.count(seq) == 1);
  }
  // the fuzz actually exercised reconnects and retries
  CHECK(rig.net.uav_link_stats(0).disconnects >= 5);
  CHECK(retries > 0);
  CHECK(unknown > 0);
  CHECK(rig.net.uav(0).stats().duplicate_commands > 0);
  MESSAGE("disconnects=" << rig.net.uav_link_stats(0).disconnects << " retries=" << retries
                         << " unknown=" << unknown << " dupes=" << rig.net.uav(0).stats().duplicate_commands);
}

TEST_CASE("stale seqs outside the dedupe window are refused") {
  std::vector<std::string> executed;
  UavSessionCore core(
      uav_cfg("alpha"),
      [&](const Command& c) {
        executed.push_back(std::to_string(c.seq));
        return Ack{c.seq, true, ""};
      },
      [] { return UavSnapshot{}; });
  core.on_connected(kT0);
  core.on_line("OK 1", kT0);
  core.take_outbox();
  core.on_line("C 100 RTB", kT0);
  core.on_line("C 100 RTB", kT0);
  core.on_line("C 36 RTB", kT0);
  core.on_line("C 37 RTB", kT0);
  const auto out = core.take_outbox();
  CHECK(out == std::vector<std::string>{"A 100 OK\n", "A 100 OK\n", "A 36 ERR stale seq\n", "A 37 OK\n"});
  CHECK(executed == std::vector<std::string>{"100", "37"});
}

TEST_CASE("video latency follows the pipeline delay") {
  SUBCASE("defaults without spikes stay within 3 to 4 s") {
    LinkConfig link;
    link.spike_probability = 0;
    Rig rig(link);
    rig.add_uav(uav_cfg("alpha"));
    rig.add_ground();
    rig.net.advance_by(1.0);
    REQUIRE(rig.run_command("alpha", cmd(CommandKind::StartVideo)).status == DispatchStatus::Acked);
    rig.net.advance_by(20.0);
    REQUIRE(rig.video.size() > 50);
    for (const auto& v : rig.video) {
      const double latency = v.at - static_cast<double>(v.h.source_unix_ms) / 1000;
      CHECK(latency >= 3.0);
      CHECK(latency <= 4.0);
      CHECK(v.bytes == 1024);
    }
    for (std::size_t i = 1; i < rig.video.size(); ++i) CHECK(rig.video[i].h.frame_no == rig.video[i - 1].h.frame_no + 1);

    const auto stop = rig.run_command("alpha", cmd(CommandKind::StopVideo));
    REQUIRE(stop.status == DispatchStatus::Acked);
    const double stopped = rig.net.now();
    rig.net.advance_by(10.0);
    CHECK(rig.video.back().at <= stopped + 0.2);
  }
  SUBCASE("defaults with spikes: median within 3 to 4 s") {
    Rig rig(LinkConfig{});
    rig.add_uav(uav_cfg("alpha"));
    rig.add_ground();
    rig.net.advance_by(1.0);
    REQUIRE(rig.run_command("alpha", cmd(CommandKind::StartVideo)).status == DispatchStatus::Acked);
    rig.net.advance_by(60.0);
    std::vector<double> lat;
    for (const auto& v : rig.video) lat.push_back(v.at - static_cast<double>(v.h.source_unix_ms) / 1000);
    std::sort(lat.begin(), lat.end());
    REQUIRE(lat.size() > 200);
    CHECK(lat[lat.size() / 2] >= 3.0);
    CHECK(lat[lat.size() / 2] <= 4.0);
    CHECK(lat.front() >= 3.5);
  }
  SUBCASE("zero pipeline delay on a perfect link") {
    Rig rig;
    auto c = uav_cfg("alpha");
    c.video_pipeline_delay_s = 0;
    rig.add_uav(c);
    rig.add_ground();
    rig.net.advance_by(1.0);
    REQUIRE(rig.run_command("alpha", cmd(CommandKind::StartVideo)).status == DispatchStatus::Acked);
    rig.net.advance_by(5.0);
    REQUIRE(rig.video.size() >= 20);
    for (const auto& v : rig.video) {
      const double latency = v.at - static_cast<double>(v.h.source_unix_ms) / 1000;
      CHECK(latency >= 0);
      CHECK(latency <= 0.035);  // three network ticks: capture, relay hop, ground hop
    }
  }
}

TEST_CASE("simulated network replays identically") {
  auto run = [] {
    LinkConfig link;
    link.loss_rate = 0.01;
    Rig rig(link);
    rig.add_uav(uav_cfg("alpha"), {{30, 34}});
    rig.add_ground();
    rig.net.advance_by(1.0);
    rig.run_command("alpha", cmd(CommandKind::StartData));
    rig.net.advance_by(120.0);
    std::vector<double> at;
    for (const auto& d : rig.data) at.push_back(d.at);
    return at;
  };
  const auto a = run(), b = run();
  CHECK(a.size() > 50);
  CHECK(a == b);
}

TEST_CASE("ground link settles late acks and timeouts") {
  GroundLinkCore::Handlers h;
  std::vector<DispatchResult> done;
  h.command_done = [&](const DispatchResult& r) { done.push_back(r); };
  GroundLinkConfig cfg;
  cfg.first_seq = 500;
  GroundLinkCore g(cfg, h);
  CHECK(g.dispatch("a", cmd(CommandKind::Rtb), kT0) == 500);
  CHECK(g.result(500)->status == DispatchStatus::NotConnected);  // no relay yet
  g.on_connected(kT0);
  g.on_item({"OK 1", ""}, kT0);
  g.on_item({"U a R", ""}, kT0);
  g.take_outbox();
  const auto seq = g.dispatch("a", cmd(CommandKind::Rtb), kT0);
  CHECK(g.take_outbox() == std::vector<std::string>{"U a C 501 RTB\n"});
  g.on_tick(kT0 + 4.9);
  CHECK(g.result(seq)->status == DispatchStatus::Pending);
  g.on_tick(kT0 + 5.1);
  CHECK(g.result(seq)->status == DispatchStatus::DeliveryUnknown);
  g.on_item({"U a A 501 ERR busy", ""}, kT0 + 6);
  CHECK(g.result(seq)->status == DispatchStatus::Rejected);
  CHECK(g.result(seq)->message == "busy");
  g.on_item({"U a X", ""}, kT0 + 7);
  CHECK_FALSE(g.uav_connected("a"));
  CHECK(done.size() == 3);
}

TEST_CASE("TCP loopback: relay, UAV client and ground link") {
  TcpRelay relay(RelayConfig{}, Endpoint{"127.0.0.1", 0});
  relay.start();
  REQUIRE(relay.port() != 0);
  const Endpoint ep{"127.0.0.1", relay.port()};

  std::mutex mu;
  std::vector<Command> executed;
  std::vector<DataLine> lines;
  SessionConfig sc = uav_cfg("tcp-uav");
  sc.data_period_s = 0.1;
  TcpUavClient uav(
      sc, ep,
      [&](const Command& c) {
        std::lock_guard<std::mutex> lk(mu);
        executed.push_back(c);
        return Ack{c.seq, true, ""};
      },
      [] {
        UavSnapshot s;
        s.frame = SensorFrame{41.4, 23.4, 0.62, 0, 0, 0, 0, 0};
        s.gps = Position{30, 31, 50};
        return s;
      });
  GroundLinkCore::Handlers h;
  h.data = [&](const std::string&, const DataLine& d, double) {
    std::lock_guard<std::mutex> lk(mu);
    lines.push_back(d);
  };
  GroundLinkConfig gc;
  gc.command_timeout_s = 2.0;
  TcpGroundLink ground(gc, ep, h);
  uav.start();
  ground.start();
  REQUIRE(ground.wait_ready(5.0));
  for (int i = 0; i < 200 && !ground.uav_connected("tcp-uav"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  REQUIRE(ground.uav_connected("tcp-uav"));
  CHECK(uav.phase() == UavSessionCore::Phase::Ready);

  Command m = cmd(CommandKind::SetMode);
  m.mode = mission::FlightMode::Loiter;
  const auto r = ground.dispatch("tcp-uav", m);
  CHECK(r.status == DispatchStatus::Acked);
  CHECK(ground.dispatch("nobody", cmd(CommandKind::Rtb)).status == DispatchStatus::NotConnected);

  CHECK(ground.dispatch("tcp-uav", cmd(CommandKind::StartData)).status == DispatchStatus::Acked);
  std::this_thread::sleep_for(std::chrono::milliseconds(600));
  CHECK(ground.dispatch("tcp-uav", cmd(CommandKind::StopData)).status == DispatchStatus::Acked);
  {
    std::lock_guard<std::mutex> lk(mu);
    CHECK(lines.size() >= 3);
    if (!lines.empty()) CHECK(lines.front().frame.humidity == 41.4);
    REQUIRE(executed.size() == 1);
    CHECK(executed[0].seq == r.seq);
  }
  uav.stop();
  for (int i = 0; i < 200 && ground.uav_connected("tcp-uav"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  CHECK_FALSE(ground.uav_connected("tcp-uav"));
  ground.stop();
  relay.stop();
}
