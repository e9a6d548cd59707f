// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "aqsim/app/simulate.hpp"
#include "aqsim/common/error.hpp"
#include "aqsim/common/random.hpp"
#include "aqsim/common/text.hpp"
#include "aqsim/flight/dynamics.hpp"
#include "aqsim/flight/profile.hpp"
#include "aqsim/ground/store.hpp"
#include "aqsim/mission/controller.hpp"
#include "aqsim/mission/geo.hpp"
#include "aqsim/mission/mission_file.hpp"
#include "aqsim/mission/validate.hpp"
#include "aqsim/sensors/dust.hpp"
#include "aqsim/sensors/gas.hpp"
#include "aqsim/sensors/who.hpp"
#include "aqsim/telemetry/link_sim.hpp"
#include "aqsim/telemetry/nmea.hpp"
#include "aqsim/telemetry/protocol.hpp"
#include "aqsim/telemetry/sim_network.hpp"

using namespace aqsim;

namespace {

// Pinned tolerances.
constexpr double kTolV = 0.05;          // V quoted to one decimal
constexpr double kTolRe = 0.001;        // relative
constexpr double kTolFt = 0.01;         // relative
constexpr double kTolFd = 0.005;        // quoted to two decimals
constexpr double kTolFr = 0.005;        // quoted to two decimals
constexpr double kTolFx = 0.01;         // relative
constexpr double kTolAccel = 0.01;      // relative; a inherits the Fx rounding
constexpr double kTolPelec = 0.01;      // relative
constexpr double kGoldenRuntimeS = 1.0;
constexpr double kTolFlightTime = 0.02;  // relative
constexpr double kTolCurve = 1e-6;       // relative
constexpr double kWaypointRadiusM = 30.0;
constexpr double kScenarioWallS = 30.0;
constexpr double kLatencyLoS = 3.0, kLatencyHiS = 4.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      if (pass) detail.str("");
      pass = false;
      detail << what;
    }
  }
};

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Worked sizing example.
void flight_golden(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = flight::stick60_paper_profile();
  const double w = p.weight_n();
  const double v = flight::takeoff_velocity(w, p.airframe, p.env);
  const double rpm = flight::motor_rpm(p.propulsion);
  const double ft = flight::dynamic_thrust(p.propulsion, rpm, p.point.thrust_airspeed).newtons;
  const double fd = flight::drag_force(p.airframe, p.env, p.point.drag_airspeed);
  const double fr = flight::rolling_friction(p.airframe, w);
  const auto report = flight::make_sizing_report(p);
  const auto& b = report.balance;
  const double re = report.reynolds;  // at the 10.1 m/s working point
  const double runtime = seconds_since(t0);

  o.require(std::abs(v - 10.1) <= kTolV, "V=" + text::fixed(v, 4));
  o.require(rel(re, 200520) <= kTolRe, "Re=" + text::fixed(re, 0));
  o.require(rel(ft, 50) <= kTolFt, "Ft=" + text::fixed(ft, 3));
  o.require(std::abs(fd - 0.81) <= kTolFd, "Fd=" + text::fixed(fd, 4));
  o.require(std::abs(fr - 0.2) <= kTolFr, "Fr=" + text::fixed(fr, 4));
  o.require(rel(b.net_force_n, 49) <= kTolFx, "Fx=" + text::fixed(b.net_force_n, 3));
  o.require(rel(b.accel_mps2, 12.25) <= kTolAccel, "a=" + text::fixed(b.accel_mps2, 3));
  o.require(rel(b.elec_power_w, 652) <= kTolPelec, "P_elec=" + text::fixed(b.elec_power_w, 1));
  o.require(runtime < kGoldenRuntimeS, "runtime " + text::fixed(runtime, 3) + " s");
  if (o.pass) {
    o.detail << "V=" << text::fixed(v, 3) << " Re=" << text::fixed(re, 0) << " Ft=" << text::fixed(ft, 2)
             << " Fd=" << text::fixed(fd, 3) << " Fr=" << text::fixed(fr, 3) << " Fx=" << text::fixed(b.net_force_n, 2)
             << " a=" << text::fixed(b.accel_mps2, 3) << " P_elec=" << text::fixed(b.elec_power_w, 1) << " W"
             << " in " << text::fixed(runtime * 1000, 2) << " ms";
  }
}

// 2. Run-time column of the partial-load table.
void flight_time_rows(Outcome& o) {
  const flight::PropulsionConfig prop = flight::stick60_paper_profile().propulsion;
  const std::pair<double, double> rows[] = {{23.3, 13.9}, {62.4, 5.2}};
  for (const auto& [amps, minutes] : rows) {
    const double t = flight::flight_time(prop, amps);
    o.require(rel(t, minutes) <= kTolFlightTime, text::fixed(amps, 1) + " A -> " + text::fixed(t, 3) + " min");
    if (o.pass) o.detail << text::fixed(amps, 1) << " A -> " << text::fixed(t, 2) << " min (want " << minutes << ") ";
  }
}

// 3. Gas curve inverse pair and dust baseline.
void sensor_curves(Outcome& o) {
  using namespace sensors;
  const GasCurve curves[] = {kLpgCurve, kCoCurve, kSmokeCurve, kO3Curve};
  double worst = 0;
  std::size_t points = 0;
  for (const auto& c : curves) {
    for (int i = 0; i <= 4000; ++i) {
      const double ppm = std::pow(10.0, i / 1000.0);
      const double back = gas_ppm(curve_forward(ppm, c), c);
      worst = std::max(worst, rel(back, ppm));
      ++points;
    }
  }
  o.require(worst <= kTolCurve, "worst relative error " + text::shortest(worst));
  const double dust0 = dust_concentration(0);
  o.require(dust0 == 0.62, "dust(0)=" + text::shortest(dust0));
  if (o.pass) {
    o.detail << points << " points over [1,1e4] ppm, worst rel err " << text::shortest(worst)
             << "; dust(0)=" << text::shortest(dust0);
  }
}

// 4. Exceedance boundaries against the WHO table as printed.
void who_boundaries(Outcome& o) {
  using namespace sensors;
  struct Row {
    Parameter p;
    double limit;
    double window_s;
  };
  const Row printed[] = {
      {Parameter::O3, 0.0473, 8 * kHourS},  {Parameter::CO, 9, 8 * kHourS},
      {Parameter::CO, 35, kHourS},          {Parameter::CO2, 5000, 8 * kHourS},
      {Parameter::Dust, 25, 8 * kHourS},    {Parameter::Dust, 10, kYearS},
      {Parameter::LPG, 1000, kYearS},
  };
  const auto& table = default_who_limits();
  o.require(table.size() == std::size(printed), "configured rows: " + std::to_string(table.size()));
  std::size_t probes = 0;
  for (const auto& r : printed) {
    const auto at = who_check(r.p, r.limit, r.window_s);
    o.require(!at.exceeded && at.limit == r.limit,
              std::string(to_string(r.p)) + " at limit " + text::shortest(r.limit));
    const double eps[] = {std::nextafter(r.limit, INFINITY) - r.limit, r.limit * 1e-9, r.limit * 1e-3, r.limit};
    for (double e : eps) {
      o.require(who_check(r.p, r.limit + e, r.window_s).exceeded,
                std::string(to_string(r.p)) + " not exceeded at limit+" + text::shortest(e));
      o.require(!who_check(r.p, r.limit - e, r.window_s).exceeded,
                std::string(to_string(r.p)) + " exceeded at limit-" + text::shortest(e));
      probes += 2;
    }
    ++probes;
  }
  if (o.pass) o.detail << std::size(printed) << " rows, " << probes << " boundary probes";
}

// 5. Demo mission scenario and distance rules.
void mission_scenario(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  app::RunSpec run;
  run.seed = 42;
  const auto r = app::run_simulation(run);
  const double wall = seconds_since(t0);
  o.require(r.violations.empty(), "demo mission rejected");
  const std::vector<std::string> want{"MANUAL", "AUTO_TAKEOFF", "AUTO_MISSION", "RETURN_TO_BASE", "LOITER"};
  o.require(r.summary.modes == want, "mode sequence differs");
  o.require(r.summary.waypoints_reached == r.summary.waypoints_total && r.summary.waypoints_total == 4,
            "waypoints reached " + std::to_string(r.summary.waypoints_reached));
  double worst = 0;
  for (const auto& rec : app::read_log(r.event_log)) {
    if (rec.kind == "WAYPOINT") worst = std::max(worst, *text::to_double(rec.at("distance_m")));
  }
  o.require(worst <= kWaypointRadiusM, "waypoint reached at " + text::fixed(worst, 3) + " m");
  o.require(!r.summary.crashed, "crashed");

  auto plan_with = [](double first_m, double last_m) {
    auto p = mission::demo_mission();
    p.waypoints.front() = mission::offset_m(p.home, 0, first_m);
    p.waypoints.back() = mission::offset_m(p.home, last_m, 0);
    for (auto& w : p.waypoints) w.alt = 120;
    return p;
  };
  auto has = [](const mission::MissionPlan& p, const std::string& code) {
    for (const auto& v : mission::validate_mission(p)) {
      if (v.code == code) return true;
    }
    return false;
  };
  o.require(has(plan_with(99, 300), "first-waypoint-too-close"), "99 m first waypoint accepted");
  o.require(has(plan_with(300, 199), "last-waypoint-too-close"), "199 m last waypoint accepted");
  o.require(mission::validate_mission(plan_with(100, 200)).empty(), "100 m / 200 m plan rejected");

  auto bad = app::RunSpec{};
  const auto dir = std::string("/tmp/aqsim-acceptance-") + std::to_string(::getpid());
  // run-level rejection goes through the same validator
  {
    auto p = plan_with(50, 300);
    std::FILE* f = std::fopen((dir + ".json").c_str(), "w");
    const auto j = mission::mission_to_json(p);
    std::fwrite(j.data(), 1, j.size(), f);
    std::fclose(f);
    bad.mission_path = dir + ".json";
    const auto rej = app::run_simulation(bad);
    o.require(!rej.violations.empty(), "simulate accepted a 50 m first waypoint");
    std::remove(bad.mission_path.c_str());
  }
  o.require(wall < kScenarioWallS, "wall clock " + text::fixed(wall, 2) + " s");
  if (o.pass) {
    o.detail << "4/4 waypoints, max " << text::fixed(worst, 3) << " m, modes MANUAL>AUTO_TAKEOFF>AUTO_MISSION>"
             << "RETURN_TO_BASE>LOITER, 100/200 m rules enforced, " << text::fixed(wall, 2) << " s wall";
  }
}

// 6. Comm-loss failsafe timing against the controller step.
void failsafe(Outcome& o) {
  using namespace mission;
  const ControllerConfig cfg;
  const double dt = 0.1, timeout = cfg.failsafe.comm_loss_timeout_s;
  const auto m = ValidatedMission::accept(demo_mission());

  // fly until AUTO_MISSION is established
  auto climb = [&] {
    auto s = manual_override(initial_state(m.plan(), cfg), FlightMode::AutoTakeoff, &m);
    while (s.mode != FlightMode::AutoMission) s = step(s, &m, cfg, dt).state;
    for (int i = 0; i < 50; ++i) s = step(s, &m, cfg, dt).state;
    return s;
  };
  const auto cruise = climb();

  // outage of `len` seconds; returns the step index of the switch, or -1
  auto trial = [&](double len) {
    auto s = cruise;
    const double start = s.clock_s;
    for (int i = 0; i < 400; ++i) {
      const double now = s.clock_s;
      const bool link = !(now >= start && now < start + len);
      s = on_comm_status(s, cfg.failsafe, link, now);
      if (s.mode == FlightMode::ReturnToBase) return i;
      s = step(s, &m, cfg, dt).state;
    }
    return -1;
  };
  // the first observation at or past the timeout is the switching step
  const int due = static_cast<int>(std::ceil(timeout / dt - 1e-9));
  const double longs[] = {timeout, timeout + dt, 2 * timeout, 30};
  for (double len : longs) {
    const int at = trial(len + dt);  // +dt: the observation at start+timeout is still dark
    o.require(at == due, "outage " + text::shortest(len) + " s switched at step " + std::to_string(at));
  }
  const double shorts[] = {timeout - dt, timeout / 2, dt};
  for (double len : shorts) {
    o.require(trial(len) == -1, "outage " + text::shortest(len) + " s forced RETURN_TO_BASE");
  }

  // end to end through the simulated link
  app::RunSpec longer;
  longer.outages_s = {{60, 60 + 2 * timeout}};
  app::RunSpec shorter;
  shorter.outages_s = {{60, 60 + timeout / 2}};
  auto rtb_reason = [](const app::SimulationResult& r) -> std::string {
    for (const auto& rec : app::read_log(r.event_log)) {
      if (rec.kind == "MODE" && rec.at("to") == "RETURN_TO_BASE") return rec.at("reason");
    }
    return "";
  };
  o.require(rtb_reason(app::run_simulation(longer)) == "comm-loss", "simulated long outage did not force RTB");
  o.require(rtb_reason(app::run_simulation(shorter)) == "mission-complete", "simulated short outage forced RTB");
  if (o.pass) {
    o.detail << "outage >= " << text::shortest(timeout) << " s switches on step " << due
             << " after loss; shorter outages keep AUTO_MISSION; simulated link agrees";
  }
}

// 7. Link delay statistics and lossless delivery.
void link_statistics(Outcome& o) {
  const telemetry::LinkConfig cfg;
  const int n = 10000;
  telemetry::LinkChannel<int> ch(cfg, Rng(cfg.seed));
  for (int i = 0; i < n; ++i) ch.send(i, i * 100.0);
  std::vector<telemetry::LinkChannel<int>::Delivery> got;
  for (double t = 0; got.size() < static_cast<std::size_t>(n) && t < 2e6; t += 1.0) {
    for (auto& d : ch.poll(t)) got.push_back(d);
  }
  o.require(got.size() == static_cast<std::size_t>(n), "received " + std::to_string(got.size()) + " of " + std::to_string(n));
  double sum = 0, mx = 0;
  bool ordered = true;
  for (std::size_t i = 0; i < got.size(); ++i) {
    ordered &= got[i].payload == static_cast<int>(i);
    sum += got[i].delay_ms;
    mx = std::max(mx, got[i].delay_ms);
  }
  const double mean = sum / n;
  const double range = cfg.base_delay_max_ms - cfg.base_delay_min_ms;
  const double var = range * range / 12 +
                     cfg.spike_delay_ms * cfg.spike_delay_ms * cfg.spike_probability * (1 - cfg.spike_probability);
  const double three_sigma = 3 * std::sqrt(var / n);
  o.require(mean >= cfg.base_delay_min_ms - three_sigma && mean <= cfg.base_delay_max_ms + three_sigma,
            "mean delay " + text::fixed(mean, 3) + " ms");
  o.require(mx >= 1700, "no spike >= 1.7 s (max " + text::fixed(mx, 1) + " ms)");
  o.require(ordered, "order not preserved");
  if (o.pass) {
    o.detail << "mean " << text::fixed(mean, 2) << " ms in [" << text::fixed(cfg.base_delay_min_ms - three_sigma, 2)
             << ", " << text::fixed(cfg.base_delay_max_ms + three_sigma, 2) << "], max " << text::fixed(mx, 1)
             << " ms, " << n << "/" << n << " in order";
  }
}

// 8. Protocol round trip and NMEA mutation fuzz.
void protocol_fuzz(Outcome& o) {
  using namespace telemetry;
  Rng rng(2024);
  std::size_t failures = 0;
  const int frames = 100000;
  for (int i = 0; i < frames; ++i) {
    DataLine d;
    d.ts = from_unix_ms(static_cast<std::int64_t>(rng.next() % 4'102'444'800'000ULL));
    d.pos = {rng.uniform(-90, 90), rng.uniform(-180, 180), rng.uniform(-100, 5000)};
    d.frame = sensors::SensorFrame{rng.uniform(0, 100),   rng.uniform(-40, 80),   rng.uniform(0, 5000),
                                   rng.uniform(0, 1000),  rng.uniform(0, 10000),  rng.uniform(-3e4, 3e4),
                                   rng.uniform(-3e4, 3e4), rng.uniform(-3e4, 3e4), rng.bernoulli(0.5)};
    try {
      const auto q = quantize(d);
      const auto line = encode_frame(d.frame, d.pos, d.ts);
      if (decode_frame(line) != q || encode_frame(q.frame, q.pos, q.ts) != line) ++failures;
    } catch (const std::exception&) {
      ++failures;
    }
  }
  o.require(failures == 0, std::to_string(failures) + " frame round-trip failures");

  std::size_t mutations = 0, rejected = 0;
  for (int i = 0; i < 200; ++i) {
    GpsFix f;
    f.lat = rng.uniform(-89, 89);
    f.lon = rng.uniform(-179, 179);
    f.alt = std::round(rng.uniform(0, 2000) * 10) / 10;
    f.utc_time_s = static_cast<double>(rng.next() % 86400);
    f.fix_quality = 1;
    f.satellites = 4 + static_cast<int>(rng.next() % 9);
    const auto s = i % 2 ? format_gga(f) : format_rmc(f);
    for (std::size_t pos = 0; pos < s.size(); ++pos) {
      for (int k = 0; k < 2; ++k) {
        auto m = s;
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
  o.require(rejected == mutations, std::to_string(mutations - rejected) + " corrupted sentences accepted");
  if (o.pass) {
    o.detail << frames << " frames round-tripped, " << rejected << "/" << mutations << " corrupted sentences rejected";
  }
}

// 9. Store query against a linear scan.
void query_oracle(Outcome& o) {
  using namespace ground;
  Rng rng(9);
  MeasurementStore store;
  std::vector<Measurement> all;
  std::set<std::tuple<std::string, std::int64_t, Parameter>> keys;
  const std::string uavs[] = {"a", "b", "c"};
  const std::int64_t t0 = 1'760'000'000'000;
  while (all.size() < 1000) {
    Measurement m;
    m.uav_id = uavs[rng.next() % 3];
    m.ts = from_unix_ms(t0 + static_cast<std::int64_t>(rng.next() % 7'200'000));
    m.parameter = static_cast<Parameter>(rng.next() % 8);
    m.lat = 25.33 + rng.uniform(-0.02, 0.02);
    m.lon = 51.43 + rng.uniform(-0.02, 0.02);
    m.alt = rng.uniform(0, 150);
    m.value = rng.uniform(0, 100);
    m.valid = rng.bernoulli(0.9);
    if (keys.insert({m.uav_id, to_unix_ms(m.ts), m.parameter}).second) all.push_back(m);
  }
  store.ingest(all, from_unix_ms(t0));

  auto matches = [](const QueryFilter& f, const Measurement& m) {
    if (f.from && m.ts < *f.from) return false;
    if (f.to && m.ts > *f.to) return false;
    if (f.bbox && (m.lat < f.bbox->lat_min || m.lat > f.bbox->lat_max || m.lon < f.bbox->lon_min ||
                   m.lon > f.bbox->lon_max)) {
      return false;
    }
    if (!f.parameters.empty() && !f.parameters.count(m.parameter)) return false;
    if (f.uav_id && m.uav_id != *f.uav_id) return false;
    return !(f.valid_only && !m.valid);
  };
  std::size_t mismatches = 0, returned = 0;
  for (int k = 0; k < 100; ++k) {
    QueryFilter f;
    const auto& x = all[rng.next() % all.size()];
    const auto& y = all[rng.next() % all.size()];
    if (rng.bernoulli(0.6)) {
      f.from = std::min(x.ts, y.ts);
      f.to = std::max(x.ts, y.ts);
    }
    if (rng.bernoulli(0.5)) {
      f.bbox = BBox{std::min(x.lat, y.lat), std::min(x.lon, y.lon), std::max(x.lat, y.lat), std::max(x.lon, y.lon)};
    }
    if (rng.bernoulli(0.5)) f.parameters = {x.parameter, y.parameter};
    if (rng.bernoulli(0.3)) f.uav_id = x.uav_id;
    f.valid_only = rng.bernoulli(0.3);

    std::vector<Measurement> want;
    for (const auto& m : all) {
      if (matches(f, m)) want.push_back(m);
    }
    std::sort(want.begin(), want.end(), [](const Measurement& a, const Measurement& b) {
      return std::tie(a.ts, a.uav_id, a.parameter) < std::tie(b.ts, b.uav_id, b.parameter);
    });
    const auto got = store.query(f);
    if (got != want) ++mismatches;
    returned += got.size();
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " of 100 filters disagree");
  if (o.pass) o.detail << "1000 measurements, 100 filters, " << returned << " rows, all equal to the scan";
}

// 10. Video end-to-end latency through the simulated network.
void video_latency(Outcome& o) {
  using namespace telemetry;
  auto measure = [](LinkConfig link, double seconds) {
    SimNetwork::Config c;
    c.uav_link = link;
    SimNetwork net(c, 1'760'000'000.0);
    SessionConfig sc;
    sc.uav_id = "cam";
    net.add_uav(
        sc, [](const Command& cmd) { return Ack{cmd.seq, true, ""}; }, [] { return UavSnapshot{}; });
    std::vector<double> lat;
    GroundLinkCore::Handlers h;
    h.video = [&lat](const std::string&, const VideoHeader& v, const std::string&, double now) {
      lat.push_back(now - static_cast<double>(v.source_unix_ms) / 1000.0);
    };
    net.add_ground({}, h);
    net.advance_by(1.0);
    Command go;
    go.kind = CommandKind::StartVideo;
    net.ground(0).dispatch("cam", go, net.now());
    net.advance_by(seconds);
    std::sort(lat.begin(), lat.end());
    return lat;
  };
  const LinkConfig defaults;
  LinkConfig no_spikes = defaults;
  no_spikes.spike_probability = 0;

  const auto base = measure(no_spikes, 60);
  o.require(base.size() > 200, "only " + std::to_string(base.size()) + " frames without spikes");
  if (!base.empty()) {
    o.require(base.front() >= kLatencyLoS && base.back() <= kLatencyHiS,
              "spike-free latency range [" + text::fixed(base.front(), 3) + ", " + text::fixed(base.back(), 3) + "]");
  }
  // defaults: spikes widen the band by the configured spike plus jitter
  const double jitter_s = (defaults.spike_delay_ms + defaults.base_delay_max_ms) / 1000.0;
  const auto spiky = measure(defaults, 120);
  o.require(spiky.size() > 400, "only " + std::to_string(spiky.size()) + " frames at defaults");
  if (!spiky.empty()) {
    const double median = spiky[spiky.size() / 2];
    o.require(median >= kLatencyLoS && median <= kLatencyHiS, "median " + text::fixed(median, 3) + " s");
    o.require(spiky.front() >= kLatencyLoS && spiky.back() <= kLatencyHiS + jitter_s,
              "default latency range [" + text::fixed(spiky.front(), 3) + ", " + text::fixed(spiky.back(), 3) + "]");
    if (o.pass) {
      o.detail << "no spikes: [" << text::fixed(base.front(), 3) << ", " << text::fixed(base.back(), 3)
               << "] s over " << base.size() << " frames; defaults: median " << text::fixed(median, 3) << " s, range ["
               << text::fixed(spiky.front(), 3) << ", " << text::fixed(spiky.back(), 3) << "] within +"
               << text::fixed(jitter_s, 2) << " s jitter";
    }
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"flight-dynamics golden values", flight_golden},
      {"flight-time rows", flight_time_rows},
      {"sensor curve round trip and dust baseline", sensor_curves},
      {"WHO exceedance boundaries", who_boundaries},
      {"mission scenario and distance rules", mission_scenario},
      {"comm-loss failsafe", failsafe},
      {"link statistics", link_statistics},
      {"protocol and NMEA fuzz", protocol_fuzz},
      {"ground query vs scan oracle", query_oracle},
      {"video latency", video_latency},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.str().c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
