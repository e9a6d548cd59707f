#include "aqsim/ground/store.hpp"

#include <sqlite3.h>

#include <cmath>

#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"

namespace aqsim::ground {

namespace {

bool retriable_code(int rc) {
  const int primary = rc & 0xff;
  return primary == SQLITE_BUSY || primary == SQLITE_LOCKED || primary == SQLITE_IOERR || primary == SQLITE_FULL;
}

[[noreturn]] void fail(sqlite3* db, int rc, const std::string& what) {
  throw StorageError("store: " + what + ": " + (db ? sqlite3_errmsg(db) : sqlite3_errstr(rc)), retriable_code(rc));
}

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  const int rc = sqlite3_exec(db, sql, nullptr, nullptr, &err);
  if (rc != SQLITE_OK) {
    std::string msg = err ? err : sqlite3_errstr(rc);
    sqlite3_free(err);
    throw StorageError("store: " + msg, retriable_code(rc));
  }
}

class Stmt {
 public:
  Stmt(sqlite3* db, const std::string& sql) : db_(db) {
    const int rc = sqlite3_prepare_v2(db, sql.c_str(), -1, &st_, nullptr);
    if (rc != SQLITE_OK) fail(db, rc, "prepare");
  }
  ~Stmt() { sqlite3_finalize(st_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  void bind(int i, double v) { sqlite3_bind_double(st_, i, v); }
  void bind(int i, std::int64_t v) { sqlite3_bind_int64(st_, i, v); }
  void bind(int i, const std::string& v) { sqlite3_bind_text(st_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT); }

  /// True while a row is available.
  bool step() {
    const int rc = sqlite3_step(st_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(db_, rc, "step");
  }
  void reset() {
    sqlite3_reset(st_);
    sqlite3_clear_bindings(st_);
  }
  double d(int c) const { return sqlite3_column_double(st_, c); }
  std::int64_t i(int c) const { return sqlite3_column_int64(st_, c); }
  std::string s(int c) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(st_, c));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(st_, c))) : std::string();
  }
  bool null(int c) const { return sqlite3_column_type(st_, c) == SQLITE_NULL; }

 private:
  sqlite3* db_;
  sqlite3_stmt* st_ = nullptr;
};

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS measurements (
  uav_id TEXT NOT NULL,
  ts_ms INTEGER NOT NULL,
  parameter INTEGER NOT NULL,
  lat REAL NOT NULL,
  lon REAL NOT NULL,
  alt REAL NOT NULL,
  value REAL NOT NULL,
  valid INTEGER NOT NULL,
  received_ms INTEGER NOT NULL,
  PRIMARY KEY (uav_id, ts_ms, parameter)
) WITHOUT ROWID;
CREATE INDEX IF NOT EXISTS measurements_by_time ON measurements (ts_ms, parameter);
CREATE TABLE IF NOT EXISTS alerts (
  id INTEGER PRIMARY KEY,
  uav_id TEXT NOT NULL,
  parameter INTEGER NOT NULL,
  window_s REAL NOT NULL,
  averaged_value REAL NOT NULL,
  limit_value REAL NOT NULL,
  lat REAL NOT NULL,
  lon REAL NOT NULL,
  alt REAL NOT NULL,
  ts_ms INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS missions (
  id INTEGER PRIMARY KEY,
  name TEXT NOT NULL,
  created_ms INTEGER NOT NULL,
  plan TEXT NOT NULL
);
)sql";

sqlite3* open_db(const std::string& path, int flags) {
  sqlite3* db = nullptr;
  const int rc = sqlite3_open_v2(path.c_str(), &db, flags | SQLITE_OPEN_NOMUTEX, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : sqlite3_errstr(rc);
    sqlite3_close(db);
    throw StorageError("store: cannot open " + path + ": " + msg, retriable_code(rc));
  }
  sqlite3_busy_timeout(db, 5000);
  return db;
}

Measurement read_measurement(const Stmt& s) {
  Measurement m;
  m.uav_id = s.s(0);
  m.ts = from_unix_ms(s.i(1));
  m.parameter = static_cast<Parameter>(s.i(2));
  m.lat = s.d(3);
  m.lon = s.d(4);
  m.alt = s.d(5);
  m.value = s.d(6);
  m.valid = s.i(7) != 0;
  return m;
}

bool finite_all(std::initializer_list<double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

std::vector<Measurement> fan_out(const std::string& uav_id, const telemetry::DataLine& line) {
  std::vector<Measurement> out;
  out.reserve(sensors::kAllParameters.size());
  for (auto p : sensors::kAllParameters) {
    out.push_back({uav_id, line.ts, line.pos.lat, line.pos.lon, line.pos.alt, p, line.frame.value(p), line.frame.valid});
  }
  return out;
}

std::vector<std::string> validate(const QueryFilter& f) {
  std::vector<std::string> out;
  if (f.from && f.to && *f.from > *f.to) out.emplace_back("from must not be after to");
  if (f.bbox) {
    const auto& b = *f.bbox;
    if (!finite_all({b.lat_min, b.lat_max, b.lon_min, b.lon_max})) {
      out.emplace_back("bbox values must be finite");
    } else {
      if (b.lat_min > b.lat_max) out.emplace_back("bbox lat_min must not exceed lat_max");
      if (b.lon_min > b.lon_max) out.emplace_back("bbox lon_min must not exceed lon_max");
      if (b.lat_min < -90 || b.lat_max > 90) out.emplace_back("bbox latitude outside [-90, 90]");
      if (b.lon_min < -180 || b.lon_max > 180) out.emplace_back("bbox longitude outside [-180, 180]");
    }
  }
  if (f.uav_id && f.uav_id->empty()) out.emplace_back("uav must not be empty");
  return out;
}

// A reader connection for the duration of one call. In-memory stores share
// the writer connection and serialise on its mutex.
class MeasurementStore::ReaderLease {
 public:
  explicit ReaderLease(const MeasurementStore& s) : s_(s) {
    if (s.in_memory()) {
      lock_ = std::unique_lock<std::mutex>(s.write_mu_);
      db_ = s.writer_;
    } else {
      db_ = s.acquire_reader();
    }
  }
  ~ReaderLease() {
    if (!s_.in_memory()) s_.release_reader(db_);
  }
  sqlite3* db() const { return db_; }

 private:
  const MeasurementStore& s_;
  std::unique_lock<std::mutex> lock_;
  sqlite3* db_;
};

MeasurementStore::MeasurementStore(const std::string& path, std::size_t readers) {
  const bool memory = path.empty() || path == ":memory:";
  writer_ = open_db(memory ? ":memory:" : path, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
  try {
    if (!memory) {
      exec(writer_, "PRAGMA journal_mode=WAL;");
      exec(writer_, "PRAGMA synchronous=NORMAL;");
    }
    exec(writer_, kSchema);
    if (!memory) {
      for (std::size_t i = 0; i < std::max<std::size_t>(readers, 1); ++i) {
        readers_.push_back(open_db(path, SQLITE_OPEN_READONLY));
      }
      free_readers_ = readers_;
    }
  } catch (...) {
    for (auto* r : readers_) sqlite3_close(r);
    sqlite3_close(writer_);
    throw;
  }
}

MeasurementStore::~MeasurementStore() {
  for (auto* r : readers_) sqlite3_close(r);
  sqlite3_close(writer_);
}

sqlite3* MeasurementStore::acquire_reader() const {
  std::unique_lock<std::mutex> lk(read_mu_);
  read_cv_.wait(lk, [&] { return !free_readers_.empty(); });
  auto* db = free_readers_.back();
  free_readers_.pop_back();
  return db;
}

void MeasurementStore::release_reader(sqlite3* db) const {
  {
    std::lock_guard<std::mutex> lk(read_mu_);
    free_readers_.push_back(db);
  }
  read_cv_.notify_one();
}

std::size_t MeasurementStore::ingest(const std::vector<Measurement>& batch, Timestamp received) {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& m = batch[i];
    if (!finite_all({m.lat, m.lon, m.alt, m.value})) problems.push_back("row " + std::to_string(i) + ": non-finite field");
    if (std::abs(m.lat) > 90 || std::abs(m.lon) > 180) problems.push_back("row " + std::to_string(i) + ": bad coordinate");
    if (m.uav_id.empty()) problems.push_back("row " + std::to_string(i) + ": empty uav_id");
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));

  std::lock_guard<std::mutex> lk(write_mu_);
  exec(writer_, "BEGIN IMMEDIATE;");
  std::size_t added = 0;
  try {
    Stmt ins(writer_,
             "INSERT OR IGNORE INTO measurements (uav_id, ts_ms, parameter, lat, lon, alt, value, valid, received_ms) "
             "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)");
    for (const auto& m : batch) {
      ins.bind(1, m.uav_id);
      ins.bind(2, static_cast<std::int64_t>(to_unix_ms(m.ts)));
      ins.bind(3, static_cast<std::int64_t>(m.parameter));
      ins.bind(4, m.lat);
      ins.bind(5, m.lon);
      ins.bind(6, m.alt);
      ins.bind(7, m.value);
      ins.bind(8, static_cast<std::int64_t>(m.valid ? 1 : 0));
      ins.bind(9, static_cast<std::int64_t>(to_unix_ms(received)));
      ins.step();
      added += static_cast<std::size_t>(sqlite3_changes(writer_));
      ins.reset();
    }
    exec(writer_, "COMMIT;");
  } catch (...) {
    sqlite3_exec(writer_, "ROLLBACK;", nullptr, nullptr, nullptr);
    throw;
  }
  return added;
}

std::vector<Measurement> MeasurementStore::query(const QueryFilter& f) const {
  if (auto problems = validate(f); !problems.empty()) throw ValidationError(std::move(problems));
  std::string sql = "SELECT uav_id, ts_ms, parameter, lat, lon, alt, value, valid FROM measurements WHERE 1";
  if (f.from) sql += " AND ts_ms >= :from";
  if (f.to) sql += " AND ts_ms <= :to";
  if (f.bbox) sql += " AND lat >= :lat0 AND lat <= :lat1 AND lon >= :lon0 AND lon <= :lon1";
  if (f.uav_id) sql += " AND uav_id = :uav";
  if (f.valid_only) sql += " AND valid = 1";
  if (!f.parameters.empty()) {
    sql += " AND parameter IN (";
    bool first = true;
    for (auto p : f.parameters) {
      if (!first) sql += ',';
      sql += std::to_string(static_cast<int>(p));
      first = false;
    }
    sql += ')';
  }
  sql += " ORDER BY ts_ms, uav_id, parameter";

  ReaderLease lease(*this);
  Stmt st(lease.db(), sql);
  int i = 1;
  if (f.from) st.bind(i++, static_cast<std::int64_t>(to_unix_ms(*f.from)));
  if (f.to) st.bind(i++, static_cast<std::int64_t>(to_unix_ms(*f.to)));
  if (f.bbox) {
    st.bind(i++, f.bbox->lat_min);
    st.bind(i++, f.bbox->lat_max);
    st.bind(i++, f.bbox->lon_min);
    st.bind(i++, f.bbox->lon_max);
  }
  if (f.uav_id) st.bind(i++, *f.uav_id);
  std::vector<Measurement> out;
  while (st.step()) out.push_back(read_measurement(st));
  return out;
}

std::size_t MeasurementStore::count() const {
  ReaderLease lease(*this);
  Stmt st(lease.db(), "SELECT COUNT(*) FROM measurements");
  st.step();
  return static_cast<std::size_t>(st.i(0));
}

std::vector<std::string> MeasurementStore::uav_ids() const {
  ReaderLease lease(*this);
  Stmt st(lease.db(), "SELECT DISTINCT uav_id FROM measurements ORDER BY uav_id");
  std::vector<std::string> out;
  while (st.step()) out.push_back(st.s(0));
  return out;
}

std::optional<Timestamp> MeasurementStore::latest(Parameter p, const std::optional<std::string>& uav) const {
  ReaderLease lease(*this);
  Stmt st(lease.db(), uav ? "SELECT MAX(ts_ms) FROM measurements WHERE parameter = ? AND uav_id = ?"
                          : "SELECT MAX(ts_ms) FROM measurements WHERE parameter = ?");
  st.bind(1, static_cast<std::int64_t>(p));
  if (uav) st.bind(2, *uav);
  st.step();
  if (st.null(0)) return std::nullopt;
  return from_unix_ms(st.i(0));
}

std::optional<Timestamp> MeasurementStore::received_at(const std::string& uav, Timestamp ts, Parameter p) const {
  ReaderLease lease(*this);
  Stmt st(lease.db(), "SELECT received_ms FROM measurements WHERE uav_id = ? AND ts_ms = ? AND parameter = ?");
  st.bind(1, uav);
  st.bind(2, static_cast<std::int64_t>(to_unix_ms(ts)));
  st.bind(3, static_cast<std::int64_t>(p));
  if (!st.step()) return std::nullopt;
  return from_unix_ms(st.i(0));
}

void MeasurementStore::add_alert(const StoredAlert& a) {
  std::lock_guard<std::mutex> lk(write_mu_);
  Stmt st(writer_,
          "INSERT INTO alerts (uav_id, parameter, window_s, averaged_value, limit_value, lat, lon, alt, ts_ms) "
          "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)");
  st.bind(1, a.uav_id);
  st.bind(2, static_cast<std::int64_t>(a.parameter));
  st.bind(3, a.window_s);
  st.bind(4, a.averaged_value);
  st.bind(5, a.limit);
  st.bind(6, a.location.lat);
  st.bind(7, a.location.lon);
  st.bind(8, a.location.alt);
  st.bind(9, static_cast<std::int64_t>(to_unix_ms(a.ts)));
  st.step();
}

std::vector<StoredAlert> MeasurementStore::alerts(const std::optional<std::string>& uav) const {
  ReaderLease lease(*this);
  Stmt st(lease.db(), std::string("SELECT uav_id, parameter, window_s, averaged_value, limit_value, lat, lon, alt, ts_ms "
                                  "FROM alerts") +
                          (uav ? " WHERE uav_id = ?" : "") + " ORDER BY ts_ms, id");
  if (uav) st.bind(1, *uav);
  std::vector<StoredAlert> out;
  while (st.step()) {
    StoredAlert a;
    a.uav_id = st.s(0);
    a.parameter = static_cast<Parameter>(st.i(1));
    a.window_s = st.d(2);
    a.averaged_value = st.d(3);
    a.limit = st.d(4);
    a.location = {st.d(5), st.d(6), st.d(7)};
    a.ts = from_unix_ms(st.i(8));
    out.push_back(std::move(a));
  }
  return out;
}

std::int64_t MeasurementStore::add_mission(const std::string& name, const std::string& plan_json, Timestamp created) {
  std::lock_guard<std::mutex> lk(write_mu_);
  Stmt st(writer_, "INSERT INTO missions (name, created_ms, plan) VALUES (?, ?, ?)");
  st.bind(1, name);
  st.bind(2, static_cast<std::int64_t>(to_unix_ms(created)));
  st.bind(3, plan_json);
  st.step();
  return sqlite3_last_insert_rowid(writer_);
}

std::vector<StoredMission> MeasurementStore::missions() const {
  ReaderLease lease(*this);
  Stmt st(lease.db(), "SELECT id, name, created_ms, plan FROM missions ORDER BY id");
  std::vector<StoredMission> out;
  while (st.step()) out.push_back({st.i(0), st.s(1), from_unix_ms(st.i(2)), st.s(3)});
  return out;
}

std::optional<StoredMission> MeasurementStore::mission(std::int64_t id) const {
  ReaderLease lease(*this);
  Stmt st(lease.db(), "SELECT id, name, created_ms, plan FROM missions WHERE id = ?");
  st.bind(1, id);
  if (!st.step()) return std::nullopt;
  return StoredMission{st.i(0), st.s(1), from_unix_ms(st.i(2)), st.s(3)};
}

std::optional<double> time_weighted_mean(const std::vector<std::pair<double, double>>& samples) {
  if (samples.empty()) return std::nullopt;
  const double span = samples.back().first - samples.front().first;
  if (!(span > 0)) {
    double sum = 0;
    for (const auto& s : samples) sum += s.second;
    return sum / static_cast<double>(samples.size());
  }
  double area = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    area += (samples[i].first - samples[i - 1].first) * (samples[i].second + samples[i - 1].second) / 2;
  }
  return area / span;
}

std::vector<Measurement> window_samples(const MeasurementStore& store, Parameter p, double window_s, Timestamp now,
                                        const std::optional<std::string>& uav) {
  if (!(window_s > 0)) throw DomainError("rolling average: window must be > 0");
  const auto now_ms = to_unix_ms(now);
  const double lower_ms = static_cast<double>(now_ms) - window_s * 1000.0;
  QueryFilter f;
  f.from = from_unix_ms(static_cast<std::int64_t>(std::floor(lower_ms)));
  f.to = now;
  f.parameters = {p};
  f.uav_id = uav;
  f.valid_only = true;
  auto rows = store.query(f);
  // the window is open on the left
  std::erase_if(rows, [&](const Measurement& m) { return static_cast<double>(to_unix_ms(m.ts)) <= lower_ms; });
  return rows;
}

std::optional<double> rolling_average(const MeasurementStore& store, Parameter p, double window_s, Timestamp now,
                                      const std::optional<std::string>& uav) {
  const auto now_ms = to_unix_ms(now);
  std::vector<std::pair<double, double>> samples;
  for (const auto& m : window_samples(store, p, window_s, now, uav)) {
    samples.emplace_back(static_cast<double>(to_unix_ms(m.ts) - now_ms) / 1000.0, m.value);
  }
  return time_weighted_mean(samples);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// Splits one CSV record starting at `pos`; advances pos past the line end.
std::vector<std::string> csv_record(std::string_view text, std::size_t& pos) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false, in_quotes = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          cur += '"';
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
      ++pos;
      continue;
    }
    if (c == '"' && cur.empty() && !quoted) {
      quoted = in_quotes = true;
      ++pos;
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      quoted = false;
      ++pos;
      continue;
    }
    if (c == '\r' || c == '\n') {
      if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      break;
    }
    cur += c;
    ++pos;
  }
  if (in_quotes) throw ParseError("csv: unterminated quoted field", pos);
  fields.push_back(std::move(cur));
  return fields;
}

constexpr const char* kCsvHeader = "uav_id,timestamp,lat,lon,alt,parameter,value,valid";

}  // namespace

std::string export_csv(const std::vector<Measurement>& rows) {
  std::string out = kCsvHeader;
  out += "\r\n";
  for (const auto& m : rows) {
    out += csv_field(m.uav_id);
    out += ',' + format_iso8601(m.ts);
    out += ',' + text::shortest(m.lat);
    out += ',' + text::shortest(m.lon);
    out += ',' + text::shortest(m.alt);
    out += ',' + std::string(sensors::to_string(m.parameter));
    out += ',' + text::shortest(m.value);
    out += m.valid ? ",1\r\n" : ",0\r\n";
  }
  return out;
}

std::vector<Measurement> parse_csv(std::string_view text) {
  std::size_t pos = 0;
  const auto header = csv_record(text, pos);
  std::string joined;
  for (std::size_t i = 0; i < header.size(); ++i) joined += (i ? "," : "") + header[i];
  if (joined != kCsvHeader) throw ParseError("csv: unexpected header", 0);
  std::vector<Measurement> out;
  while (pos < text.size()) {
    const std::size_t row_at = pos;
    const auto f = csv_record(text, pos);
    if (f.size() == 1 && f[0].empty()) continue;  // blank line
    if (f.size() != 8) throw ParseError("csv: expected 8 fields, got " + std::to_string(f.size()), row_at);
    Measurement m;
    m.uav_id = f[0];
    try {
      m.ts = parse_iso8601(f[1]);
    } catch (const ParseError&) {
      throw ParseError("csv: bad timestamp", row_at);
    }
    const auto lat = text::to_double(f[2]), lon = text::to_double(f[3]), alt = text::to_double(f[4]),
               value = text::to_double(f[6]);
    const auto param = sensors::parse_parameter(f[5]);
    if (!lat || !lon || !alt || !value) throw ParseError("csv: bad number", row_at);
    if (!param) throw ParseError("csv: unknown parameter '" + f[5] + "'", row_at);
    if (f[7] != "0" && f[7] != "1") throw ParseError("csv: valid must be 0 or 1", row_at);
    m.lat = *lat;
    m.lon = *lon;
    m.alt = *alt;
    m.parameter = *param;
    m.value = *value;
    m.valid = f[7] == "1";
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace aqsim::ground
