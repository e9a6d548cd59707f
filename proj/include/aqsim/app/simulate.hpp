#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aqsim/mission/event_log.hpp"
#include "aqsim/sensors/suite.hpp"
#include "aqsim/telemetry/link_sim.hpp"

namespace aqsim::app {

/// Concentrations over the survey area: clean background plus one Gaussian
/// plume centred `plume_east_m`/`plume_north_m` from home.
struct AmbientField {
  sensors::AmbientAir background;
  double plume_east_m = 700;
  double plume_north_m = 1300;
  double plume_sigma_m = 250;
  double plume_co_ppm = 60;
  double plume_o3_ppm = 0.08;
  double plume_dust = 0.4;

  sensors::AmbientAir at(double east_m, double north_m) const;
};

struct RunSpec {
  /// Demo mission when empty.
  std::string mission_path;
  /// Built-in name or profile file; supplies the power table and battery.
  std::string profile = "stick60-paper";
  telemetry::LinkConfig link;
  /// Upper bound on simulated time.
  double duration_s = 1800;
  std::uint64_t seed = 42;
  /// Artifacts are written here when non-empty.
  std::string output_dir;
  /// Cellular outages [start, end) in seconds since the run started.
  std::vector<std::pair<double, double>> outages_s;
  /// The run ends after loitering this long.
  double loiter_hold_s = 60;
  AmbientField ambient;
};

std::vector<std::string> validate(const RunSpec& run);

/// Figures recomputed from the event log alone.
struct Summary {
  std::uint64_t seed = 0;
  std::size_t waypoints_total = 0;
  std::size_t waypoints_reached = 0;
  /// Largest distance to a waypoint when it was marked reached.
  double max_deviation_m = 0;
  std::vector<std::string> modes;
  std::size_t alerts = 0;
  std::size_t comm_losses = 0;
  std::size_t link_drops = 0;
  std::size_t commands_acked = 0;
  std::size_t commands_failed = 0;
  std::uint64_t measurements = 0;
  bool crashed = false;
  double duration_s = 0;

  bool completed() const { return !crashed && waypoints_reached == waypoints_total && waypoints_total > 0; }
  friend bool operator==(const Summary&, const Summary&) = default;
};

std::string summary_json(const Summary& s);

/// Parses a whole event log. Throws ParseError naming the 1-based line of a
/// corrupt record, or of the point where a truncated log stops.
std::vector<mission::LogRecord> read_log(std::string_view text);
/// Throws ParseError when the log lacks its BEGIN or END record.
Summary summarize(const std::vector<mission::LogRecord>& log);

struct SimulationResult {
  std::vector<std::string> violations;  // non-empty: the run never started
  std::string event_log;
  std::string measurements_csv;
  Summary summary;
};

/// Flies the mission with a simulated UAV, relay and ground station on one
/// virtual clock. Deterministic in the seed. Throws ValidationError for a
/// malformed RunSpec; mission violations are returned, not thrown.
SimulationResult run_simulation(const RunSpec& run);

/// Writes events.log, measurements.csv and summary.json.
void write_artifacts(const std::string& dir, const SimulationResult& r);

}  // namespace aqsim::app
