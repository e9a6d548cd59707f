#pragma once
// HTTP API of the ground station.
//
//   GET  /api/measurements   from, to (ISO-8601 or UNIX ms), bbox, param, uav
//   GET  /api/average        param, window (e.g. "8h"), at (default: latest sample), uav
//   GET  /api/alerts         uav
//   GET  /api/export.csv     same filters as /api/measurements
//   GET  /api/series         param, bucket (e.g. "1h"), plus measurement filters
//   GET  /api/grid           param, bbox, cells ("RxC", default 10x10), from, to, uav
//   GET  /api/uavs
//   GET  /api/uav/{id}/state
//   POST /api/uav/{id}/command   {"kind": "SET_MODE", "mode": "MANUAL", "seq": 7}
//   POST /api/missions       mission JSON; ?name=
//   GET  /api/missions, /api/missions/{id}
//   GET  /api/live           server-sent events (see LiveEvent)
//
// bbox is "lat_min,lon_min,lat_max,lon_max"; param is a comma-separated list
// of parameter names. Errors are {"error": ..., "problems": [...]}.
// Command status codes: 200 acked, 409 rejected by the UAV, 404 not
// connected, 504 delivery unknown (retry with the returned seq).

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aqsim/ground/station.hpp"
#include "aqsim/telemetry/net.hpp"

namespace httplib {
class Server;
}

namespace aqsim::ground {

using Params = std::multimap<std::string, std::string>;

struct ApiConfig {
  /// Served at "/" when non-empty (operator console assets).
  std::string static_dir;
  std::chrono::milliseconds live_poll{200};
  double live_keepalive_s = 15.0;
};

/// Throws ValidationError listing every malformed parameter.
QueryFilter parse_filter(const Params& p);
BBox parse_bbox(const std::string& text);
Timestamp parse_time_param(const std::string& text);

std::string measurements_json(const std::vector<Measurement>& rows);
std::string uav_state_json(const UavView& v);

struct SeriesBucket {
  Timestamp start{};
  std::size_t count = 0;
  double mean = 0;
  double min = 0;
  double max = 0;
};
/// Buckets aligned to multiples of bucket_s since the UNIX epoch; empty
/// buckets are omitted.
std::vector<SeriesBucket> series(const std::vector<Measurement>& rows, double bucket_s);

struct GridCell {
  std::size_t row = 0;  // latitude index from lat_min
  std::size_t col = 0;  // longitude index from lon_min
  std::size_t count = 0;
  double mean = 0;
  double max = 0;
};
/// Rows outside the box are ignored; points on the max edge fall in the last cell.
std::vector<GridCell> grid(const std::vector<Measurement>& rows, const BBox& box, std::size_t n_rows,
                           std::size_t n_cols);

/// Registers every route on `server`.
void install_api(httplib::Server& server, GroundStation& station, const ApiConfig& cfg = {});

/// Owns an HTTP server thread bound to one endpoint.
class ApiServer {
 public:
  ApiServer(GroundStation& station, ApiConfig cfg = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds (port 0 picks one) and starts serving; returns the bound port.
  std::uint16_t start(const telemetry::Endpoint& listen);
  void stop();
  std::uint16_t port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  GroundStation& station_;
  std::uint16_t port_ = 0;
};

}  // namespace aqsim::ground
