#include "aqsim/app/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <set>

#include "aqsim/common/error.hpp"
#include "aqsim/common/random.hpp"
#include "aqsim/common/text.hpp"
#include "aqsim/flight/profile.hpp"
#include "aqsim/ground/station.hpp"
#include "aqsim/mission/flight_controller.hpp"
#include "aqsim/mission/geo.hpp"
#include "aqsim/mission/mission_file.hpp"
#include "aqsim/mission/validate.hpp"
#include "aqsim/telemetry/nmea.hpp"
#include "aqsim/telemetry/sim_network.hpp"

namespace aqsim::app {

using mission::LogRecord;

namespace {

constexpr double kSimEpochS = 1'760'000'000.0;
constexpr double kStepS = 0.1;
constexpr double kSensorPeriodS = 1.0;
constexpr double kGpsPeriodS = 1.0;
constexpr double kPi = 3.14159265358979323846;
const std::string kUavId = "aq-1";

std::pair<double, double> local_east_north(const mission::Waypoint& home, const mission::Waypoint& p) {
  const double k = kPi / 180.0 * mission::kEarthMeanRadiusM;
  return {(p.lon - home.lon) * k * std::cos(home.lat * kPi / 180.0), (p.lat - home.lat) * k};
}

LogRecord record(double t, std::string kind, std::vector<std::pair<std::string, std::string>> fields) {
  LogRecord r;
  r.t_s = t;
  r.kind = std::move(kind);
  r.fields = std::move(fields);
  return r;
}

ParseError log_error(std::size_t line_no, const std::string& what) {
  return ParseError("line " + std::to_string(line_no) + ": " + what, 0);
}

}  // namespace

sensors::AmbientAir AmbientField::at(double east_m, double north_m) const {
  const double de = east_m - plume_east_m, dn = north_m - plume_north_m;
  const double w = std::exp(-(de * de + dn * dn) / (2 * plume_sigma_m * plume_sigma_m));
  auto air = background;
  air.co_ppm += plume_co_ppm * w;
  air.o3_ppm += plume_o3_ppm * w;
  air.dust += plume_dust * w;
  return air;
}

std::vector<std::string> validate(const RunSpec& run) {
  std::vector<std::string> out;
  if (!(run.duration_s > 0)) out.emplace_back("duration must be > 0");
  if (!run.mission_path.empty() && !std::filesystem::exists(run.mission_path)) {
    out.push_back("mission file not found: " + run.mission_path);
  }
  if (!(run.loiter_hold_s >= 0)) out.emplace_back("loiter hold must be >= 0");
  for (const auto& p : telemetry::validate(run.link)) out.push_back("link: " + p);
  for (const auto& [a, b] : run.outages_s) {
    if (!(a >= 0 && b > a)) out.push_back("outage must satisfy 0 <= start < end: " + text::shortest(a) + ".." + text::shortest(b));
  }
  return out;
}

std::string summary_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  j["completed"] = s.completed();
  j["crashed"] = s.crashed;
  j["waypoints_total"] = s.waypoints_total;
  j["waypoints_reached"] = s.waypoints_reached;
  j["max_deviation_m"] = s.max_deviation_m;
  j["modes"] = s.modes;
  j["alerts"] = s.alerts;
  j["comm_losses"] = s.comm_losses;
  j["link_drops"] = s.link_drops;
  j["commands_acked"] = s.commands_acked;
  j["commands_failed"] = s.commands_failed;
  j["measurements"] = s.measurements;
  j["duration_s"] = s.duration_s;
  return j.dump(2) + "\n";
}

std::vector<LogRecord> read_log(std::string_view text) {
  std::vector<LogRecord> out;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    ++line_no;
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) throw log_error(line_no, "truncated record (no line end)");
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!out.empty() && out.back().kind == "END") throw log_error(line_no, "record after END");
    out.push_back(mission::parse_record(line, line_no));
    if (out.size() == 1 && out[0].kind != "BEGIN") throw log_error(line_no, "log must start with BEGIN");
    if (out.size() > 1 && out.back().t_s < out[out.size() - 2].t_s) throw log_error(line_no, "time goes backwards");
  }
  if (out.empty()) throw log_error(1, "empty log");
  if (out.back().kind != "END") throw log_error(line_no + 1, "log truncated (no END record)");
  return out;
}

Summary summarize(const std::vector<LogRecord>& log) {
  if (log.empty() || log.front().kind != "BEGIN") throw log_error(1, "missing BEGIN record");
  if (log.back().kind != "END") throw log_error(log.size() + 1, "missing END record");
  Summary s;
  std::set<std::string> reached;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    auto num = [&](std::string_view key) {
      std::string v;
      try {
        v = r.at(key);
      } catch (const std::out_of_range& e) {
        throw log_error(i + 1, e.what());
      }
      const auto d = text::to_double(v);
      if (!d) throw log_error(i + 1, "bad number in " + std::string(key));
      return *d;
    };
    auto str = [&](std::string_view key) -> const std::string& {
      try {
        return r.at(key);
      } catch (const std::out_of_range& e) {
        throw log_error(i + 1, e.what());
      }
    };
    if (r.kind == "BEGIN") {
      s.seed = static_cast<std::uint64_t>(num("seed"));
      s.waypoints_total = static_cast<std::size_t>(num("waypoints"));
      s.modes = {str("mode")};
    } else if (r.kind == "MODE") {
      s.modes.push_back(str("to"));
    } else if (r.kind == "WAYPOINT") {
      reached.insert(str("index"));
      s.max_deviation_m = std::max(s.max_deviation_m, num("distance_m"));
    } else if (r.kind == "ALERT") {
      ++s.alerts;
    } else if (r.kind == "COMM_LOST") {
      ++s.comm_losses;
    } else if (r.kind == "LINK") {
      if (str("state") == "down") ++s.link_drops;
    } else if (r.kind == "COMMAND") {
      if (str("status") == "acked") {
        ++s.commands_acked;
      } else {
        ++s.commands_failed;
      }
    } else if (r.kind == "CRASHED") {
      s.crashed = true;
    } else if (r.kind == "END") {
      s.measurements = static_cast<std::uint64_t>(num("measurements"));
      s.duration_s = r.t_s;
    }
  }
  s.waypoints_reached = reached.size();
  return s;
}

namespace {

/// Everything one run owns; lives on the heap so callbacks can hold `this`.
class Scenario {
 public:
  Scenario(const RunSpec& run, mission::MissionPlan plan, mission::ControllerConfig cfg)
      : run_(run),
        plan_(std::move(plan)),
        fc_(cfg, mission::initial_state(plan_, cfg)),
        sensors_(sensors::SensorSuiteConfig{}, Rng(run.seed).fork().next()),
        station_(store_),
        net_(net_config(run), kSimEpochS) {
    sensors_.calibrate();
    std::vector<telemetry::Outage> outages;
    for (const auto& [a, b] : run.outages_s) outages.push_back({a, b});
    telemetry::SessionConfig sc;
    sc.uav_id = kUavId;
    net_.add_uav(
        sc, [this](const telemetry::Command& c) { return execute(c); },
        [this] {
          telemetry::UavSnapshot s;
          s.frame = frame_;
          s.gps = gps_;
          s.state = fc_.state();
          return s;
        },
        std::move(outages));

    auto h = station_.handlers();
    auto inner_presence = h.presence;
    h.presence = [this, inner_presence](const std::string& uav, bool up, double now) {
      inner_presence(uav, up, now);
      log(now - kSimEpochS, "LINK", {{"uav", uav}, {"state", up ? "up" : "down"}});
    };
    auto inner_data = h.data;
    h.data = [this, inner_data](const std::string& uav, const telemetry::DataLine& d, double now) {
      inner_data(uav, d, now);
      const auto all = store_.alerts(uav);
      for (; alerts_logged_ < all.size(); ++alerts_logged_) {
        const auto& a = all[alerts_logged_];
        log(now - kSimEpochS, "ALERT",
            {{"uav", a.uav_id},
             {"parameter", std::string(sensors::to_string(a.parameter))},
             {"window_s", text::shortest(a.window_s)},
             {"average", text::fixed(a.averaged_value, 4)},
             {"limit", text::shortest(a.limit)}});
      }
    };
    net_.add_ground(telemetry::GroundLinkConfig{}, std::move(h));

    telemetry::Command upload;
    upload.kind = telemetry::CommandKind::UploadMission;
    upload.mission_json = mission::mission_to_json(plan_);
    telemetry::Command data;
    data.kind = telemetry::CommandKind::StartData;
    telemetry::Command go;
    go.kind = telemetry::CommandKind::SetMode;
    go.mode = mission::FlightMode::AutoTakeoff;
    script_ = {upload, data, go};

    log(0, "BEGIN",
        {{"seed", std::to_string(run.seed)},
         {"waypoints", std::to_string(plan_.waypoints.size())},
         {"mode", std::string(mission::to_string(fc_.state().mode))}});
  }

  void run() {
    double t = 0, loiter_since = -1;
    bool stop = false;
    while (!stop && t < run_.duration_s - 1e-9) {
      t = std::round((t + kStepS) * 1000) / 1000;
      net_.advance_to(kSimEpochS + t);
      drive_ground();
      fc_.enqueue(mission::LinkStatus{net_.uav(0).link_ok(net_.now())});
      for (const auto& e : fc_.tick(kStepS)) {
        log_line(mission::to_record(e));
        if (e.kind == mission::EventKind::Crashed || e.kind == mission::EventKind::Landed) stop = true;
      }
      const auto st = fc_.state();
      if (st.mode == mission::FlightMode::Loiter) {
        if (loiter_since < 0) loiter_since = t;
        if (t - loiter_since >= run_.loiter_hold_s) stop = true;
      }
      sample(st, t);
    }
    log(t, "END", {{"measurements", std::to_string(store_.count())}, {"frames", std::to_string(station_.stats().frames)}});
  }

  SimulationResult result() {
    // handler-side events carry the controller clock, one step behind the network
    std::stable_sort(records_.begin(), records_.end(),
                     [](const LogRecord& a, const LogRecord& b) { return a.t_s < b.t_s; });
    SimulationResult r;
    for (const auto& rec : records_) {
      r.event_log += mission::format_record(rec);
      r.event_log += '\n';
    }
    r.measurements_csv = ground::export_csv(store_.query({}));
    r.summary = summarize(read_log(r.event_log));
    return r;
  }

 private:
  static telemetry::SimNetwork::Config net_config(const RunSpec& run) {
    telemetry::SimNetwork::Config c;
    c.uav_link = run.link;
    c.uav_link.seed = run.seed;
    return c;
  }

  telemetry::Ack execute(const telemetry::Command& c) {
    std::string reason;
    try {
      switch (c.kind) {
        case telemetry::CommandKind::SetMode:
          reason = fc_.apply_now(mission::ModeRequest{*c.mode});
          break;
        case telemetry::CommandKind::Rtb:
          reason = fc_.apply_now(mission::ModeRequest{mission::FlightMode::ReturnToBase});
          break;
        case telemetry::CommandKind::UploadMission:
          reason = fc_.apply_now(mission::UploadMission{mission::mission_from_json(c.mission_json)});
          break;
        default:
          break;
      }
    } catch (const std::exception& e) {
      reason = e.what();
    }
    return {c.seq, reason.empty(), reason};
  }

  // Sends the scripted commands one at a time once the UAV is reachable.
  void drive_ground() {
    auto& g = net_.ground(0);
    const double now = net_.now();
    if (pending_) {
      const auto r = g.result(*pending_);
      if (!r || r->status == telemetry::DispatchStatus::Pending) return;
      log(now - kSimEpochS, "COMMAND",
          {{"kind", std::string(telemetry::to_string(script_.front().kind))},
           {"seq", std::to_string(r->seq)},
           {"status", std::string(telemetry::to_string(r->status))}});
      pending_.reset();
      if (r->status == telemetry::DispatchStatus::DeliveryUnknown) {
        script_.front().seq = r->seq;  // retry under the same seq
      } else if (r->status != telemetry::DispatchStatus::NotConnected) {
        script_.erase(script_.begin());
      }
    }
    if (script_.empty() || g.phase() != telemetry::GroundLinkCore::Phase::Ready || !g.uav_connected(kUavId)) return;
    pending_ = g.dispatch(kUavId, script_.front(), now);
  }

  void sample(const mission::UavState& st, double t) {
    if (t + 1e-9 >= next_sensor_) {
      const auto [east, north] = local_east_north(plan_.home, st.position);
      frame_ = sensors_.read(run_.ambient.at(east, north), st.airspeed_mps, t);
      next_sensor_ += kSensorPeriodS;
    }
    if (t + 1e-9 >= next_gps_) {
      // round trip through the receiver's sentence format
      telemetry::GpsFix fix;
      fix.lat = st.position.lat;
      fix.lon = st.position.lon;
      fix.alt = st.position.alt;
      fix.utc_time_s = std::fmod(kSimEpochS + t, 86400.0);
      fix.fix_quality = 1;
      fix.satellites = 9;
      const auto parsed = telemetry::parse_nmea(telemetry::format_gga(fix));
      gps_ = telemetry::Position{parsed.lat, parsed.lon, parsed.alt};
      next_gps_ += kGpsPeriodS;
    }
  }

  void log(double t, std::string kind, std::vector<std::pair<std::string, std::string>> fields) {
    log_line(record(t, std::move(kind), std::move(fields)));
  }
  void log_line(LogRecord r) { records_.push_back(std::move(r)); }

  const RunSpec& run_;
  mission::MissionPlan plan_;
  mission::FlightController fc_;
  sensors::SensorSuite sensors_;
  ground::MeasurementStore store_;
  ground::GroundStation station_;
  telemetry::SimNetwork net_;
  std::optional<sensors::SensorFrame> frame_;
  std::optional<telemetry::Position> gps_;
  double next_sensor_ = 0;
  double next_gps_ = 0;
  std::vector<telemetry::Command> script_;
  std::optional<std::uint64_t> pending_;
  std::size_t alerts_logged_ = 0;
  std::vector<LogRecord> records_;
};

}  // namespace

SimulationResult run_simulation(const RunSpec& run) {
  if (auto problems = validate(run); !problems.empty()) throw ValidationError(std::move(problems));
  const auto plan = run.mission_path.empty() ? mission::demo_mission() : mission::load_mission(run.mission_path);
  SimulationResult r;
  try {
    for (const auto& v : mission::validate_mission(plan)) r.violations.push_back(v.code + ": " + v.message);
  } catch (const ValidationError& e) {
    r.violations = e.problems();
  }
  if (!r.violations.empty()) return r;

  const auto profile = flight::load_profile(run.profile);
  if (auto problems = flight::validate(profile); !problems.empty()) throw ValidationError(std::move(problems));
  mission::ControllerConfig cfg;
  if (!profile.partial_load.empty()) cfg.power.partial_load = profile.partial_load;
  cfg.power.usable_capacity_mah = profile.propulsion.usable_capacity_mah();

  auto scenario = std::make_unique<Scenario>(run, plan, cfg);
  scenario->run();
  return scenario->result();
}

void write_artifacts(const std::string& dir, const SimulationResult& r) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& body) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << body;
    if (!f) throw std::runtime_error("cannot write " + path.string());
  };
  put("events.log", r.event_log);
  put("measurements.csv", r.measurements_csv);
  put("summary.json", summary_json(r.summary));
}

}  // namespace aqsim::app
