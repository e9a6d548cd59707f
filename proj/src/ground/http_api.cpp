#include "aqsim/ground/http_api.hpp"

#include <httplib.h>

#include <cmath>
#include <json.hpp>
#include <thread>

#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"
#include "aqsim/mission/mission_file.hpp"
#include "aqsim/mission/validate.hpp"
#include "aqsim/telemetry/tcp.hpp"

namespace aqsim::ground {

using json = nlohmann::ordered_json;
using telemetry::Command;
using telemetry::CommandKind;
using telemetry::DispatchStatus;

namespace {

std::optional<std::string> param(const Params& p, const std::string& key) {
  const auto it = p.find(key);
  if (it == p.end()) return std::nullopt;
  return it->second;
}

std::optional<Timestamp> parse_time_opt(const Params& p, const std::string& key, std::vector<std::string>& problems) {
  const auto v = param(p, key);
  if (!v) return std::nullopt;
  try {
    return parse_time_param(*v);
  } catch (const std::exception&) {
    problems.push_back(key + ": expected ISO-8601 UTC time or UNIX milliseconds");
    return std::nullopt;
  }
}

std::set<Parameter> parse_params(const std::string& text, std::vector<std::string>& problems) {
  std::set<Parameter> out;
  for (auto name : text::split(text, ',')) {
    name = text::trim(name);
    if (name.empty()) continue;
    if (auto p = sensors::parse_parameter(name)) {
      out.insert(*p);
    } else {
      problems.push_back("param: unknown parameter '" + std::string(name) + "'");
    }
  }
  return out;
}

json error_body(const std::string& message, const std::vector<std::string>& problems = {}) {
  json j;
  j["error"] = message;
  j["problems"] = problems;
  return j;
}

void send_json(httplib::Response& res, int status, const json& j) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

void send_raw_json(httplib::Response& res, int status, std::string body) {
  res.status = status;
  res.set_content(std::move(body), "application/json");
}

json frame_json(const telemetry::DataLine& d) {
  json j;
  j["timestamp"] = format_iso8601(d.ts);
  j["lat"] = d.pos.lat;
  j["lon"] = d.pos.lon;
  j["alt"] = d.pos.alt;
  for (auto p : sensors::kAllParameters) j[std::string(sensors::to_string(p))] = d.frame.value(p);
  j["valid"] = d.frame.valid;
  return j;
}

json status_json(const telemetry::StatusLine& s) {
  json j;
  j["timestamp"] = format_iso8601(s.ts);
  j["mode"] = mission::to_string(s.mode);
  j["status"] = mission::to_string(s.status);
  j["lat"] = s.pos.lat;
  j["lon"] = s.pos.lon;
  j["alt"] = s.pos.alt;
  j["heading_deg"] = s.heading_deg;
  j["airspeed_mps"] = s.airspeed_mps;
  j["battery_mah"] = s.battery_mah;
  j["throttle_pct"] = s.throttle_pct;
  j["link_ok"] = s.link_ok;
  j["target_index"] = s.target_index;
  return j;
}

json violations_json(const std::vector<mission::Violation>& vs) {
  json arr = json::array();
  for (const auto& v : vs) {
    json j;
    j["code"] = v.code;
    j["message"] = v.message;
    j["waypoint"] = v.waypoint ? json(*v.waypoint) : json(nullptr);
    arr.push_back(j);
  }
  return arr;
}

json mission_json(const StoredMission& m) {
  json j;
  j["id"] = m.id;
  j["name"] = m.name;
  j["created"] = format_iso8601(m.created);
  j["plan"] = json::parse(m.plan_json);
  return j;
}

int status_code(DispatchStatus s) {
  switch (s) {
    case DispatchStatus::Acked: return 200;
    case DispatchStatus::Rejected: return 409;
    case DispatchStatus::NotConnected: return 404;
    case DispatchStatus::DeliveryUnknown: return 504;
    case DispatchStatus::Pending: return 202;
  }
  return 500;
}

// Validates a mission plan document; returns the compact JSON or fills `res`.
std::optional<mission::MissionPlan> checked_plan(const std::string& body, httplib::Response& res) {
  mission::MissionPlan plan;
  try {
    plan = mission::mission_from_json(body);
  } catch (const std::exception& e) {
    send_json(res, 400, error_body(std::string("malformed mission: ") + e.what()));
    return std::nullopt;
  }
  std::vector<mission::Violation> v;
  try {
    v = mission::validate_mission(plan);
  } catch (const ValidationError& e) {
    send_json(res, 422, error_body("mission rejected", e.problems()));
    return std::nullopt;
  }
  if (!v.empty()) {
    json j = error_body("mission rejected");
    for (const auto& x : v) j["problems"].push_back(x.message);
    j["violations"] = violations_json(v);
    send_json(res, 422, j);
    return std::nullopt;
  }
  return plan;
}

void handle_command(GroundStation& st, const std::string& uav, const httplib::Request& req, httplib::Response& res) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const std::exception& e) {
    send_json(res, 400, error_body(std::string("body is not JSON: ") + e.what()));
    return;
  }
  if (!body.is_object() || !body.contains("kind") || !body["kind"].is_string()) {
    send_json(res, 400, error_body("body must be an object with a string 'kind'"));
    return;
  }
  Command c;
  const auto kind = telemetry::parse_command_kind(body["kind"].get<std::string>());
  if (!kind) {
    send_json(res, 400, error_body("unknown command kind '" + body["kind"].get<std::string>() + "'"));
    return;
  }
  c.kind = *kind;
  if (body.contains("seq")) {
    if (!body["seq"].is_number_unsigned() || body["seq"].get<std::uint64_t>() == 0) {
      send_json(res, 400, error_body("seq must be a positive integer"));
      return;
    }
    c.seq = body["seq"].get<std::uint64_t>();
  }
  if (c.kind == CommandKind::SetMode) {
    const auto mode = body.contains("mode") && body["mode"].is_string()
                          ? mission::parse_mode(body["mode"].get<std::string>())
                          : std::nullopt;
    if (!mode) {
      send_json(res, 400, error_body("SET_MODE needs a valid 'mode'"));
      return;
    }
    c.mode = mode;
  }
  if (c.kind == CommandKind::UploadMission) {
    std::string plan_text;
    if (body.contains("mission_id") && body["mission_id"].is_number_integer()) {
      const auto m = st.store().mission(body["mission_id"].get<std::int64_t>());
      if (!m) {
        send_json(res, 404, error_body("no such mission"));
        return;
      }
      plan_text = m->plan_json;
    } else if (body.contains("mission") && body["mission"].is_object()) {
      plan_text = body["mission"].dump();
    } else {
      send_json(res, 400, error_body("UPLOAD_MISSION needs 'mission' or 'mission_id'"));
      return;
    }
    const auto plan = checked_plan(plan_text, res);
    if (!plan) return;
    c.mission_json = mission::mission_to_json(*plan);
  }
  const auto r = st.command(uav, std::move(c));
  send_raw_json(res, status_code(r.status), dispatch_json(r));
}

}  // namespace

Timestamp parse_time_param(const std::string& text) {
  const auto t = text::trim(text);
  if (!t.empty() && t.find_first_not_of("-0123456789") == std::string_view::npos) {
    if (const auto ms = text::to_int(t)) return from_unix_ms(*ms);
  }
  return parse_iso8601(t);
}

BBox parse_bbox(const std::string& text) {
  const auto f = text::split(text, ',');
  if (f.size() != 4) throw ValidationError({"bbox: expected lat_min,lon_min,lat_max,lon_max"});
  double v[4];
  for (int i = 0; i < 4; ++i) {
    const auto d = text::to_double(text::trim(f[static_cast<std::size_t>(i)]));
    if (!d) throw ValidationError({"bbox: field " + std::to_string(i + 1) + " is not a number"});
    v[i] = *d;
  }
  return {v[0], v[1], v[2], v[3]};
}

QueryFilter parse_filter(const Params& p) {
  std::vector<std::string> problems;
  QueryFilter f;
  f.from = parse_time_opt(p, "from", problems);
  f.to = parse_time_opt(p, "to", problems);
  if (const auto b = param(p, "bbox")) {
    try {
      f.bbox = parse_bbox(*b);
    } catch (const ValidationError& e) {
      problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
  }
  if (const auto ps = param(p, "param")) f.parameters = parse_params(*ps, problems);
  if (const auto u = param(p, "uav")) f.uav_id = *u;
  if (const auto v = param(p, "valid")) {
    if (*v == "1" || *v == "true") {
      f.valid_only = true;
    } else if (*v != "0" && *v != "false") {
      problems.emplace_back("valid: expected 0/1");
    }
  }
  for (auto& x : validate(f)) problems.push_back(std::move(x));
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return f;
}

std::string measurements_json(const std::vector<Measurement>& rows) {
  json arr = json::array();
  for (const auto& m : rows) {
    json j;
    j["uav_id"] = m.uav_id;
    j["timestamp"] = format_iso8601(m.ts);
    j["lat"] = m.lat;
    j["lon"] = m.lon;
    j["alt"] = m.alt;
    j["parameter"] = sensors::to_string(m.parameter);
    j["value"] = m.value;
    j["valid"] = m.valid;
    arr.push_back(std::move(j));
  }
  return arr.dump();
}

std::string uav_state_json(const UavView& v) {
  json j;
  j["uav_id"] = v.uav_id;
  j["connected"] = v.connected;
  j["last_heard"] = v.last_heard_s ? json(format_iso8601(telemetry::unix_seconds_to_timestamp(*v.last_heard_s)))
                                   : json(nullptr);
  j["status"] = v.status ? status_json(*v.status) : json(nullptr);
  j["frame"] = v.latest ? frame_json(*v.latest) : json(nullptr);
  if (v.video) {
    j["video"] = {{"frame_no", v.video->frame_no},
                  {"source", format_iso8601(from_unix_ms(v.video->source_unix_ms))},
                  {"latency_s", v.video_latency_s},
                  {"frames", v.video_frames}};
  } else {
    j["video"] = nullptr;
  }
  j["frames"] = v.frames;
  return j.dump();
}

std::vector<SeriesBucket> series(const std::vector<Measurement>& rows, double bucket_s) {
  if (!(bucket_s > 0)) throw ValidationError({"bucket must be > 0"});
  const auto bucket_ms = static_cast<std::int64_t>(std::llround(bucket_s * 1000.0));
  if (bucket_ms <= 0) throw ValidationError({"bucket must be at least 1 ms"});
  std::map<std::int64_t, SeriesBucket> acc;
  for (const auto& m : rows) {
    const auto ms = to_unix_ms(m.ts);
    const auto key = (ms >= 0 ? ms / bucket_ms : -((-ms + bucket_ms - 1) / bucket_ms)) * bucket_ms;
    auto [it, fresh] = acc.try_emplace(key);
    auto& b = it->second;
    if (fresh) {
      b.start = from_unix_ms(key);
      b.min = b.max = m.value;
    }
    ++b.count;
    b.mean += m.value;  // sum until the end
    b.min = std::min(b.min, m.value);
    b.max = std::max(b.max, m.value);
  }
  std::vector<SeriesBucket> out;
  for (auto& [k, b] : acc) {
    b.mean /= static_cast<double>(b.count);
    out.push_back(b);
  }
  return out;
}

std::vector<GridCell> grid(const std::vector<Measurement>& rows, const BBox& box, std::size_t n_rows,
                           std::size_t n_cols) {
  if (n_rows == 0 || n_cols == 0) throw ValidationError({"cells must be at least 1x1"});
  std::map<std::pair<std::size_t, std::size_t>, GridCell> acc;
  const double dlat = box.lat_max - box.lat_min, dlon = box.lon_max - box.lon_min;
  auto index = [](double v, double lo, double span, std::size_t n) {
    if (!(span > 0)) return std::size_t{0};
    const auto i = static_cast<std::size_t>(std::floor((v - lo) / span * static_cast<double>(n)));
    return std::min(i, n - 1);
  };
  for (const auto& m : rows) {
    if (m.lat < box.lat_min || m.lat > box.lat_max || m.lon < box.lon_min || m.lon > box.lon_max) continue;
    const auto r = index(m.lat, box.lat_min, dlat, n_rows), c = index(m.lon, box.lon_min, dlon, n_cols);
    auto [it, fresh] = acc.try_emplace({r, c});
    auto& cell = it->second;
    if (fresh) {
      cell.row = r;
      cell.col = c;
      cell.max = m.value;
    }
    ++cell.count;
    cell.mean += m.value;
    cell.max = std::max(cell.max, m.value);
  }
  std::vector<GridCell> out;
  for (auto& [k, cell] : acc) {
    cell.mean /= static_cast<double>(cell.count);
    out.push_back(cell);
  }
  return out;
}

void install_api(httplib::Server& svr, GroundStation& st, const ApiConfig& cfg) {
  // ValidationError -> 400 for every GET that takes filters
  auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const ValidationError& e) {
        send_json(res, 400, error_body("invalid request", e.problems()));
      } catch (const ParseError& e) {
        send_json(res, 400, error_body(e.what()));
      } catch (const StorageError& e) {
        res.set_header("Retry-After", "1");
        send_json(res, e.retriable() ? 503 : 500, error_body(e.what()));
      }
    };
  };

  svr.Get("/api/measurements", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            send_raw_json(res, 200, measurements_json(st.store().query(parse_filter(req.params))));
          }));

  svr.Get("/api/export.csv", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            res.set_content(export_csv(st.store().query(parse_filter(req.params))), "text/csv; charset=utf-8");
          }));

  svr.Get("/api/average", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            std::vector<std::string> problems;
            const auto pname = param(req.params, "param");
            Parameter p{};
            if (const auto parsed = pname ? sensors::parse_parameter(*pname) : std::nullopt) {
              p = *parsed;
            } else {
              problems.emplace_back("param: one parameter name required");
            }
            double window_s = 0;
            if (const auto w = param(req.params, "window")) {
              try {
                window_s = parse_duration_s(*w);
              } catch (const std::exception&) {
                problems.emplace_back("window: bad duration");
              }
            }
            if (!(window_s > 0)) problems.emplace_back("window: must be > 0");
            const auto at = parse_time_opt(req.params, "at", problems);
            if (!problems.empty()) throw ValidationError(problems);
            const auto uav = param(req.params, "uav");
            // default evaluation instant is the newest sample, so a frozen store gives stable answers
            const auto now = at ? at : st.store().latest(p, uav);
            json j;
            j["parameter"] = sensors::to_string(p);
            j["unit"] = sensors::unit_of(p);
            j["window_s"] = window_s;
            j["uav"] = uav ? json(*uav) : json(nullptr);
            j["at"] = now ? json(format_iso8601(*now)) : json(nullptr);
            std::optional<double> v;
            if (now) v = rolling_average(st.store(), p, window_s, *now, uav);
            j["value"] = v ? json(*v) : json(nullptr);
            send_json(res, 200, j);
          }));

  svr.Get("/api/alerts", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            std::string body = "[";
            bool first = true;
            for (const auto& a : st.store().alerts(param(req.params, "uav"))) {
              if (!first) body += ',';
              body += alert_json(a);
              first = false;
            }
            send_raw_json(res, 200, body + "]");
          }));

  svr.Get("/api/series", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            auto f = parse_filter(req.params);
            if (f.parameters.size() != 1) throw ValidationError({"param: exactly one parameter required"});
            const auto b = param(req.params, "bucket");
            if (!b) throw ValidationError({"bucket: required (e.g. 60s, 1h)"});
            double bucket_s;
            try {
              bucket_s = parse_duration_s(*b);
            } catch (const std::exception&) {
              throw ValidationError({"bucket: bad duration"});
            }
            json arr = json::array();
            for (const auto& s : series(st.store().query(f), bucket_s)) {
              arr.push_back({{"start", format_iso8601(s.start)},
                             {"count", s.count},
                             {"mean", s.mean},
                             {"min", s.min},
                             {"max", s.max}});
            }
            json j;
            j["parameter"] = sensors::to_string(*f.parameters.begin());
            j["bucket_s"] = bucket_s;
            j["buckets"] = arr;
            send_json(res, 200, j);
          }));

  svr.Get("/api/grid", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            auto f = parse_filter(req.params);
            if (f.parameters.size() != 1) throw ValidationError({"param: exactly one parameter required"});
            if (!f.bbox) throw ValidationError({"bbox: required"});
            std::size_t n_rows = 10, n_cols = 10;
            if (const auto c = param(req.params, "cells")) {
              const auto parts = text::split(*c, 'x');
              const auto r = parts.size() == 2 ? text::to_int(parts[0]) : std::nullopt;
              const auto k = parts.size() == 2 ? text::to_int(parts[1]) : std::nullopt;
              if (!r || !k || *r < 1 || *k < 1 || *r > 1000 || *k > 1000) {
                throw ValidationError({"cells: expected RxC with 1..1000 each"});
              }
              n_rows = static_cast<std::size_t>(*r);
              n_cols = static_cast<std::size_t>(*k);
            }
            json cells = json::array();
            for (const auto& c : grid(st.store().query(f), *f.bbox, n_rows, n_cols)) {
              cells.push_back({{"row", c.row}, {"col", c.col}, {"count", c.count}, {"mean", c.mean}, {"max", c.max}});
            }
            json j;
            j["parameter"] = sensors::to_string(*f.parameters.begin());
            j["bbox"] = {f.bbox->lat_min, f.bbox->lon_min, f.bbox->lat_max, f.bbox->lon_max};
            j["rows"] = n_rows;
            j["cols"] = n_cols;
            j["cells"] = cells;
            send_json(res, 200, j);
          }));

  svr.Get("/api/uavs", [&st](const httplib::Request&, httplib::Response& res) {
    std::string body = "[";
    bool first = true;
    for (const auto& id : st.uavs()) {
      if (const auto v = st.uav(id)) {
        if (!first) body += ',';
        body += uav_state_json(*v);
        first = false;
      }
    }
    send_raw_json(res, 200, body + "]");
  });

  svr.Get(R"(/api/uav/([A-Za-z0-9_.\-]+)/state)", [&st](const httplib::Request& req, httplib::Response& res) {
    const auto v = st.uav(req.matches[1]);
    if (!v) {
      send_json(res, 404, error_body("unknown uav"));
      return;
    }
    send_raw_json(res, 200, uav_state_json(*v));
  });

  svr.Post(R"(/api/uav/([A-Za-z0-9_.\-]+)/command)", [&st](const httplib::Request& req, httplib::Response& res) {
    handle_command(st, req.matches[1], req, res);
  });

  svr.Post("/api/missions", guarded([&st](const httplib::Request& req, httplib::Response& res) {
             const auto plan = checked_plan(req.body, res);
             if (!plan) return;
             const std::string name = param(req.params, "name").value_or("mission");
             const auto id = st.store().add_mission(name, mission::mission_to_json(*plan),
                                                    telemetry::unix_seconds_to_timestamp(telemetry::unix_now_s()));
             json j;
             j["id"] = id;
             send_json(res, 201, j);
           }));

  svr.Get("/api/missions", guarded([&st](const httplib::Request&, httplib::Response& res) {
            json arr = json::array();
            for (const auto& m : st.store().missions()) arr.push_back(mission_json(m));
            send_json(res, 200, arr);
          }));

  svr.Get(R"(/api/missions/(\d+))", guarded([&st](const httplib::Request& req, httplib::Response& res) {
            const auto id = text::to_int(std::string(req.matches[1]));
            const auto m = id ? st.store().mission(*id) : std::nullopt;
            if (!m) {
              send_json(res, 404, error_body("no such mission"));
              return;
            }
            send_json(res, 200, mission_json(*m));
          }));

  const auto poll = cfg.live_poll;
  const double keepalive_s = cfg.live_keepalive_s;
  svr.Get("/api/live", [&st, poll, keepalive_s](const httplib::Request&, httplib::Response& res) {
    auto sub = st.live().subscribe();
    // initial snapshot so a (re)connecting client has state without waiting
    std::string hello = "[";
    bool first = true;
    for (const auto& id : st.uavs()) {
      if (const auto v = st.uav(id)) {
        if (!first) hello += ',';
        hello += uav_state_json(*v);
        first = false;
      }
    }
    hello = "event: hello\ndata: " + hello + "]\n\n";
    auto sent_hello = std::make_shared<bool>(false);
    auto last_write = std::make_shared<std::chrono::steady_clock::time_point>(std::chrono::steady_clock::now());
    res.set_header("Cache-Control", "no-cache");
    res.set_header("X-Accel-Buffering", "no");
    res.set_chunked_content_provider(
        "text/event-stream",
        [sub, hello, sent_hello, last_write, poll, keepalive_s](std::size_t, httplib::DataSink& sink) {
          if (!*sent_hello) {
            *sent_hello = true;
            return sink.write(hello.data(), hello.size());
          }
          if (sub->closed()) {
            sink.done();
            return true;
          }
          std::string out;
          if (auto e = sub->wait(poll)) {
            out = "id: " + std::to_string(e->id) + "\nevent: " + e->name + "\ndata: " + e->data + "\n\n";
            while (auto more = sub->wait(std::chrono::milliseconds(0))) {
              out += "id: " + std::to_string(more->id) + "\nevent: " + more->name + "\ndata: " + more->data + "\n\n";
              if (out.size() > 64 * 1024) break;
            }
          } else if (std::chrono::duration<double>(std::chrono::steady_clock::now() - *last_write).count() >=
                     keepalive_s) {
            out = ": keepalive\n\n";
          }
          if (out.empty()) return true;
          *last_write = std::chrono::steady_clock::now();
          return sink.write(out.data(), out.size());
        },
        [&st, sub](bool) { st.live().unsubscribe(sub); });
  });

  if (!cfg.static_dir.empty()) svr.set_mount_point("/", cfg.static_dir);
}

struct ApiServer::Impl {
  httplib::Server server;
  std::thread thread;
};

ApiServer::ApiServer(GroundStation& station, ApiConfig cfg) : impl_(std::make_unique<Impl>()), station_(station) {
  install_api(impl_->server, station_, cfg);
}

ApiServer::~ApiServer() { stop(); }

std::uint16_t ApiServer::start(const telemetry::Endpoint& listen) {
  auto& svr = impl_->server;
  int port = listen.port;
  if (listen.port == 0) {
    port = svr.bind_to_any_port(listen.host);
  } else if (!svr.bind_to_port(listen.host, listen.port)) {
    port = -1;
  }
  if (port <= 0) throw std::runtime_error("http: cannot listen on " + telemetry::to_string(listen));
  port_ = static_cast<std::uint16_t>(port);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  svr.wait_until_ready();
  return port_;
}

void ApiServer::stop() {
  if (!impl_->thread.joinable()) return;
  station_.live().close();
  impl_->server.stop();
  impl_->thread.join();
}

}  // namespace aqsim::ground
