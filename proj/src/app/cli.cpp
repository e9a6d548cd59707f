#include "aqsim/app/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "aqsim/app/simulate.hpp"
#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"
#include "aqsim/flight/profile.hpp"
#include "aqsim/ground/http_api.hpp"
#include "aqsim/mission/flight_controller.hpp"
#include "aqsim/mission/mission_file.hpp"
#include "aqsim/mission/validate.hpp"
#include "aqsim/sensors/registry.hpp"
#include "aqsim/telemetry/nmea.hpp"
#include "aqsim/telemetry/tcp.hpp"

namespace aqsim::app {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void print_problems(std::ostream& err, const std::string& head, const std::vector<std::string>& problems) {
  err << head << '\n';
  for (const auto& p : problems) err << "  - " << p << '\n';
}

// "START:END" in seconds.
std::pair<double, double> parse_outage(const std::string& s) {
  const auto parts = text::split(s, ':');
  const auto a = parts.size() == 2 ? text::to_double(parts[0]) : std::nullopt;
  const auto b = parts.size() == 2 ? text::to_double(parts[1]) : std::nullopt;
  if (!a || !b) throw ValidationError({"outage must be START:END in seconds, got '" + s + "'"});
  return {*a, *b};
}

int cmd_size(const std::string& profile_name, std::ostream& out, std::ostream& err) {
  flight::SizingProfile profile;
  try {
    profile = flight::load_profile(profile_name);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const auto report = flight::make_sizing_report(profile);
    flight::write_report(out, report);
    out << '\n';
    flight::write_flight_time_csv(out, report, profile.propulsion);
  } catch (const ValidationError& e) {
    print_problems(err, "invalid profile '" + profile_name + "':", e.problems());
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_simulate(RunSpec run, const std::vector<std::string>& outages, std::ostream& out, std::ostream& err) {
  SimulationResult r;
  try {
    for (const auto& o : outages) run.outages_s.push_back(parse_outage(o));
    r = run_simulation(run);
  } catch (const ValidationError& e) {
    print_problems(err, "invalid run:", e.problems());
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!r.violations.empty()) {
    print_problems(err, "mission rejected:", r.violations);
    return kExitRejected;
  }
  if (!run.output_dir.empty()) write_artifacts(run.output_dir, r);
  out << summary_json(r.summary);
  if (r.summary.crashed) {
    err << "vehicle crashed\n";
    return kExitCrashed;
  }
  return kExitOk;
}

int cmd_replay(const std::string& log_path, const std::string& expect_path, std::ostream& out, std::ostream& err) {
  Summary s;
  try {
    s = summarize(read_log(read_file(log_path)));
  } catch (const ParseError& e) {
    err << log_path << ": " << e.what() << '\n';
    return kExitCorruptLog;
  }
  const auto text = summary_json(s);
  out << text;
  if (!expect_path.empty()) {
    if (read_file(expect_path) != text) {
      err << "summary differs from " << expect_path << '\n';
      return kExitFailure;
    }
  }
  return kExitOk;
}

}  // namespace

int run_serve(const ServeOptions& opts, const std::atomic<bool>& stop, std::ostream& log,
              const std::function<void(std::uint16_t, std::uint16_t)>& on_ready) {
  ground::StationConfig sc;
  if (!opts.who_table.empty()) sc.alerts.limits = sensors::load_who_table(opts.who_table);
  sc.alerts.dust_factor = opts.dust_factor;
  ground::MeasurementStore store(opts.store_path);
  ground::GroundStation station(store, sc);

  telemetry::RelayConfig rc;
  rc.token = opts.token;
  telemetry::TcpRelay relay(rc, opts.relay);
  relay.start();

  telemetry::GroundLinkConfig gc;
  gc.token = opts.token;
  gc.first_seq = static_cast<std::uint64_t>(telemetry::unix_now_s() * 1000);
  telemetry::TcpGroundLink link(gc, {"127.0.0.1", relay.port()}, station.handlers());
  station.set_dispatcher([&link](const std::string& uav, telemetry::Command c) { return link.dispatch(uav, std::move(c)); });
  link.start();

  ground::ApiConfig ac;
  ac.static_dir = opts.static_dir;
  ground::ApiServer api(station, ac);
  const auto port = api.start(opts.listen);
  log << "api listening on " << opts.listen.host << ':' << port << ", relay on " << opts.relay.host << ':'
      << relay.port() << ", store " << opts.store_path << std::endl;
  if (on_ready) on_ready(port, relay.port());
  while (!stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));

  api.stop();
  station.set_dispatcher({});
  link.stop();
  relay.stop();
  log << "stopped" << std::endl;
  return kExitOk;
}

int run_uav_node(const UavNodeOptions& opts, const std::atomic<bool>& stop, std::ostream& log) {
  const auto profile = flight::load_profile(opts.profile);
  mission::ControllerConfig cfg;
  if (!profile.partial_load.empty()) cfg.power.partial_load = profile.partial_load;
  cfg.power.usable_capacity_mah = profile.propulsion.usable_capacity_mah();
  const auto home = mission::demo_mission();
  mission::FlightController fc(cfg, mission::initial_state(home, cfg));

  // latest readings, swapped whole under the mutex
  std::mutex mu;
  std::shared_ptr<const sensors::SensorFrame> frame;
  std::shared_ptr<const telemetry::Position> gps;

  telemetry::SessionConfig sc;
  sc.uav_id = opts.uav_id;
  sc.token = opts.token;
  auto handler = [&fc](const telemetry::Command& c) -> telemetry::Ack {
    std::optional<mission::ControlInput> in;
    try {
      if (c.kind == telemetry::CommandKind::SetMode) in = mission::ModeRequest{*c.mode};
      if (c.kind == telemetry::CommandKind::Rtb) in = mission::ModeRequest{mission::FlightMode::ReturnToBase};
      if (c.kind == telemetry::CommandKind::UploadMission) {
        in = mission::UploadMission{mission::mission_from_json(c.mission_json)};
      }
    } catch (const std::exception& e) {
      return {c.seq, false, e.what()};
    }
    if (!in) return {c.seq, true, ""};
    auto done = fc.submit(*in);
    if (done.wait_for(std::chrono::seconds(2)) != std::future_status::ready) return {c.seq, false, "controller busy"};
    const auto reason = done.get();
    return {c.seq, reason.empty(), reason};
  };
  auto snapshot = [&] {
    telemetry::UavSnapshot s;
    std::lock_guard lk(mu);
    if (frame) s.frame = *frame;
    if (gps) s.gps = *gps;
    s.state = fc.state();
    return s;
  };
  telemetry::TcpUavClient client(sc, opts.relay, handler, snapshot);
  client.start();
  log << opts.uav_id << " dialing " << telemetry::to_string(opts.relay) << std::endl;

  const auto t0 = std::chrono::steady_clock::now();
  auto since_start = [t0] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  std::thread control([&] {
    auto next = std::chrono::steady_clock::now();
    while (!stop) {
      next += std::chrono::milliseconds(100);
      fc.enqueue(mission::LinkStatus{client.link_ok()});
      try {
        for (const auto& e : fc.tick(0.1)) log << mission::format_record(mission::to_record(e)) << std::endl;
      } catch (const mission::StateError&) {
        // landed or crashed: keep the link up, stop flying
      }
      std::this_thread::sleep_until(next);
    }
  });
  std::thread sensors_thread([&] {
    sensors::SensorSuite suite({}, opts.seed);
    suite.calibrate();
    AmbientField ambient;
    while (!stop) {
      const auto st = fc.state();
      const double k = 3.14159265358979323846 / 180.0 * mission::kEarthMeanRadiusM;
      const double east = (st.position.lon - home.home.lon) * k * std::cos(home.home.lat * k / mission::kEarthMeanRadiusM);
      const double north = (st.position.lat - home.home.lat) * k;
      auto f = std::make_shared<const sensors::SensorFrame>(suite.read(ambient.at(east, north), st.airspeed_mps, since_start()));
      {
        std::lock_guard lk(mu);
        frame = std::move(f);
      }
      std::this_thread::sleep_for(std::chrono::seconds(1));
    }
  });
  std::thread gps_thread([&] {
    while (!stop) {
      const auto st = fc.state();
      telemetry::GpsFix fix;
      fix.lat = st.position.lat;
      fix.lon = st.position.lon;
      fix.alt = st.position.alt;
      fix.utc_time_s = std::fmod(telemetry::unix_now_s(), 86400.0);
      fix.fix_quality = 1;
      fix.satellites = 9;
      try {
        const auto p = telemetry::parse_nmea(telemetry::format_gga(fix));
        auto pos = std::make_shared<const telemetry::Position>(telemetry::Position{p.lat, p.lon, p.alt});
        std::lock_guard lk(mu);
        gps = std::move(pos);
      } catch (const telemetry::NmeaError& e) {
        log << "gps: " << e.what() << std::endl;
      }
      std::this_thread::sleep_for(std::chrono::seconds(1));
    }
  });

  control.join();
  sensors_thread.join();
  gps_thread.join();
  client.stop();
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Air-quality survey UAV simulator and ground station", "aqsim"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::string profile = "stick60-paper";
  auto* size = app.add_subcommand("size", "Print the sizing report and flight-time table for a profile");
  size->add_option("--profile", profile, "Built-in profile name or profile file path");

  RunSpec run;
  std::vector<std::string> outages;
  run.output_dir = "sim-out";
  auto* sim = app.add_subcommand("simulate", "Fly a mission headlessly with UAV, relay and ground station in-process");
  sim->add_option("--mission", run.mission_path, "Mission JSON file (demo mission when omitted)");
  sim->add_option("--profile", run.profile, "Built-in profile name or profile file path");
  sim->add_option("--seed", run.seed, "Seed for every random source");
  sim->add_option("--duration", run.duration_s, "Upper bound on simulated seconds");
  sim->add_option("--loiter-hold", run.loiter_hold_s, "Seconds to loiter before the run ends");
  sim->add_option("--out", run.output_dir, "Directory for events.log, measurements.csv and summary.json");
  sim->add_option("--delay-min-ms", run.link.base_delay_min_ms, "Cellular link base delay, lower bound");
  sim->add_option("--delay-max-ms", run.link.base_delay_max_ms, "Cellular link base delay, upper bound");
  sim->add_option("--spike-ms", run.link.spike_delay_ms, "Delay spike duration");
  sim->add_option("--spike-prob", run.link.spike_probability, "Per-payload spike probability");
  sim->add_option("--loss-rate", run.link.loss_rate, "Per-payload loss probability (each loss drops the link)");
  sim->add_option("--outage", outages, "Link outage START:END in seconds since start (repeatable)");

  std::string log_path, expect_path;
  auto* replay = app.add_subcommand("replay", "Recompute the run summary from an event log");
  replay->add_option("log", log_path, "events.log written by simulate")->required();
  replay->add_option("--expect", expect_path, "summary.json to compare against");

  ServeOptions so;
  std::string listen = "127.0.0.1:8080", relay_ep = "0.0.0.0:7700";
  auto* serve = app.add_subcommand("serve", "Run the relay and ground station with the HTTP API");
  serve->add_option("--listen", listen, "HTTP API endpoint host:port")->envname("AQSIM_LISTEN");
  serve->add_option("--relay", relay_ep, "Relay listen endpoint host:port")->envname("AQSIM_RELAY");
  serve->add_option("--store-path", so.store_path, "SQLite database file (:memory: for none)")->envname("AQSIM_STORE");
  serve->add_option("--static-dir", so.static_dir, "Operator console assets served at /");
  serve->add_option("--token", so.token, "Shared relay token")->envname("AQSIM_TOKEN");
  serve->add_option("--who-table", so.who_table, "WHO limit table JSON (built-in when omitted)");
  serve->add_option("--dust-factor", so.dust_factor, "Multiplier from dust sensor units to ug/m3");

  UavNodeOptions uo;
  std::string uav_relay = "127.0.0.1:7700";
  auto* uav = app.add_subcommand("uav", "Run a real-time simulated UAV that dials the relay");
  uav->add_option("--relay", uav_relay, "Relay endpoint host:port")->envname("AQSIM_RELAY");
  uav->add_option("--id", uo.uav_id, "UAV identifier");
  uav->add_option("--token", uo.token, "Shared relay token")->envname("AQSIM_TOKEN");
  uav->add_option("--seed", uo.seed, "Sensor noise seed");
  uav->add_option("--profile", uo.profile, "Built-in profile name or profile file path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (size->parsed()) return cmd_size(profile, out, err);
    if (sim->parsed()) return cmd_simulate(run, outages, out, err);
    if (replay->parsed()) return cmd_replay(log_path, expect_path, out, err);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    if (serve->parsed()) {
      so.listen = telemetry::parse_endpoint(listen);
      so.relay = telemetry::parse_endpoint(relay_ep);
      return run_serve(so, g_stop, err);
    }
    uo.relay = telemetry::parse_endpoint(uav_relay);
    return run_uav_node(uo, g_stop, err);
  } catch (const ValidationError& e) {
    print_problems(err, "invalid input:", e.problems());
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace aqsim::app
