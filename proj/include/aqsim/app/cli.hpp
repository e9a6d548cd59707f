#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "aqsim/telemetry/net.hpp"

namespace aqsim::app {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,     // runtime failure, replay mismatch
  kExitUsage = 2,       // bad flags, invalid profile or run spec
  kExitRejected = 3,    // mission failed validation
  kExitCrashed = 4,     // the simulated vehicle crashed
  kExitCorruptLog = 5,  // replay input unreadable
};

struct ServeOptions {
  telemetry::Endpoint listen{"127.0.0.1", 8080};
  telemetry::Endpoint relay{"0.0.0.0", 7700};
  std::string store_path = "aqsim.db";
  std::string static_dir;
  std::string token = "aqsim";
  std::string who_table;  // WHO limit file; built-in table when empty
  double dust_factor = 1.0;
};

/// Relay, ground link, store and HTTP API in one process. Blocks until
/// `stop` is set; `on_ready(api_port, relay_port)` fires once both listen.
int run_serve(const ServeOptions& opts, const std::atomic<bool>& stop, std::ostream& log,
              const std::function<void(std::uint16_t, std::uint16_t)>& on_ready = {});

struct UavNodeOptions {
  telemetry::Endpoint relay{"127.0.0.1", 7700};
  std::string uav_id = "uav-1";
  std::string token = "aqsim";
  std::uint64_t seed = 42;
  std::string profile = "stick60-paper";
};

/// Real-time UAV: flight controller, sensor and GPS threads feeding a
/// relay client. Blocks until `stop` is set.
int run_uav_node(const UavNodeOptions& opts, const std::atomic<bool>& stop, std::ostream& log);

/// Entry point behind the aqsim executable; `args` excludes the program name.
/// serve and uav run until SIGINT or SIGTERM.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aqsim::app
