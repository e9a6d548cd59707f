#pragma once

#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "aqsim/common/time.hpp"
#include "aqsim/sensors/parameter.hpp"
#include "aqsim/telemetry/protocol.hpp"

struct sqlite3;

namespace aqsim::ground {

using sensors::Parameter;

struct Measurement {
  std::string uav_id;
  Timestamp ts{};  // UAV clock
  double lat = 0;
  double lon = 0;
  double alt = 0;
  Parameter parameter = Parameter::Humidity;
  double value = 0;
  bool valid = true;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// One measurement per parameter, in column order.
std::vector<Measurement> fan_out(const std::string& uav_id, const telemetry::DataLine& line);

/// Inclusive latitude/longitude rectangle.
struct BBox {
  double lat_min = -90;
  double lon_min = -180;
  double lat_max = 90;
  double lon_max = 180;
};

/// Every clause is optional; an empty parameter set means all parameters.
/// Time bounds are inclusive.
struct QueryFilter {
  std::optional<Timestamp> from;
  std::optional<Timestamp> to;
  std::optional<BBox> bbox;
  std::set<Parameter> parameters;
  std::optional<std::string> uav_id;
  /// Only rows with the valid flag set.
  bool valid_only = false;
};

std::vector<std::string> validate(const QueryFilter& f);

/// Storage failure. `retriable` is set for lock contention and I/O hiccups.
class StorageError : public std::runtime_error {
 public:
  StorageError(const std::string& what, bool retriable) : std::runtime_error(what), retriable_(retriable) {}
  bool retriable() const noexcept { return retriable_; }

 private:
  bool retriable_;
};

struct StoredAlert {
  std::string uav_id;
  Parameter parameter = Parameter::CO;
  double window_s = 0;
  double averaged_value = 0;
  double limit = 0;
  telemetry::Position location;
  Timestamp ts{};

  friend bool operator==(const StoredAlert&, const StoredAlert&) = default;
};

struct StoredMission {
  std::int64_t id = 0;
  std::string name;
  Timestamp created{};
  std::string plan_json;
};

/// SQLite-backed measurement, alert and mission store.
///
/// Schema:
///   measurements(uav_id TEXT, ts_ms INTEGER, parameter INTEGER, lat REAL,
///                lon REAL, alt REAL, value REAL, valid INTEGER,
///                received_ms INTEGER, PRIMARY KEY(uav_id, ts_ms, parameter))
///   alerts(id INTEGER PRIMARY KEY, uav_id, parameter, window_s, averaged_value,
///          limit_value, lat, lon, alt, ts_ms)
///   missions(id INTEGER PRIMARY KEY, name TEXT, created_ms INTEGER, plan TEXT)
/// `parameter` holds the column index of the parameter. A file-backed store
/// runs in WAL mode with one writer connection and a pool of reader
/// connections, so reads see a consistent snapshot while ingest proceeds.
/// ":memory:" uses a single shared connection.
class MeasurementStore {
 public:
  explicit MeasurementStore(const std::string& path = ":memory:", std::size_t readers = 4);
  ~MeasurementStore();
  MeasurementStore(const MeasurementStore&) = delete;
  MeasurementStore& operator=(const MeasurementStore&) = delete;

  /// Inserts in one transaction. Exact duplicates (same uav, timestamp and
  /// parameter) are skipped; returns the number of new rows.
  std::size_t ingest(const std::vector<Measurement>& batch, Timestamp received);

  /// Throws ValidationError on a malformed filter. Ordered by timestamp,
  /// then uav_id, then parameter.
  std::vector<Measurement> query(const QueryFilter& f) const;
  std::size_t count() const;
  std::vector<std::string> uav_ids() const;
  /// Latest measurement time for a parameter (any UAV unless given).
  std::optional<Timestamp> latest(Parameter p, const std::optional<std::string>& uav = std::nullopt) const;
  /// Server receipt time of a stored row.
  std::optional<Timestamp> received_at(const std::string& uav, Timestamp ts, Parameter p) const;

  void add_alert(const StoredAlert& a);
  std::vector<StoredAlert> alerts(const std::optional<std::string>& uav = std::nullopt) const;

  std::int64_t add_mission(const std::string& name, const std::string& plan_json, Timestamp created);
  std::vector<StoredMission> missions() const;
  std::optional<StoredMission> mission(std::int64_t id) const;

  bool in_memory() const { return readers_.empty(); }

 private:
  class ReaderLease;
  sqlite3* acquire_reader() const;
  void release_reader(sqlite3* db) const;

  sqlite3* writer_ = nullptr;
  mutable std::mutex write_mu_;
  std::vector<sqlite3*> readers_;
  mutable std::vector<sqlite3*> free_readers_;
  mutable std::mutex read_mu_;
  mutable std::condition_variable read_cv_;
};

/// Time-weighted mean of (t, value) samples sorted by t: the trapezoidal
/// integral divided by the covered span. A single sample, or samples that
/// all share one instant, yield their arithmetic mean. Empty input -> none.
std::optional<double> time_weighted_mean(const std::vector<std::pair<double, double>>& samples);

/// Valid samples with timestamp in (now - window, now], time-ordered.
std::vector<Measurement> window_samples(const MeasurementStore& store, Parameter p, double window_s, Timestamp now,
                                        const std::optional<std::string>& uav = std::nullopt);

/// Time-weighted mean of valid samples with timestamp in (now - window, now].
std::optional<double> rolling_average(const MeasurementStore& store, Parameter p, double window_s, Timestamp now,
                                      const std::optional<std::string>& uav = std::nullopt);

/// CSV with header uav_id,timestamp,lat,lon,alt,parameter,value,valid.
/// Numbers use the shortest text that parses back exactly.
std::string export_csv(const std::vector<Measurement>& rows);
/// Inverse of export_csv. Throws ParseError (offset = byte of the bad row).
std::vector<Measurement> parse_csv(std::string_view text);

}  // namespace aqsim::ground
