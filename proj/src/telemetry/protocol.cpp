#include "aqsim/telemetry/protocol.hpp"

#include <cmath>

#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"

namespace aqsim::telemetry {

namespace {

using sensors::Parameter;

struct Field {
  std::string_view text;
  std::size_t offset;
};

std::string_view rtrim(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

/// Single-space separated fields with their byte offsets. An empty field
/// (double space, leading space) is a parse error.
std::vector<Field> fields_of(std::string_view line, std::size_t max_fields = SIZE_MAX) {
  std::vector<Field> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    if (out.size() + 1 == max_fields) {
      out.push_back({line.substr(start), start});
      break;
    }
    const auto sp = line.find(' ', start);
    const auto end = sp == std::string_view::npos ? line.size() : sp;
    if (end == start) throw ParseError("empty field", start);
    out.push_back({line.substr(start, end - start), start});
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  return out;
}

void expect_count(const std::vector<Field>& f, std::size_t lo, std::size_t hi, std::string_view line, const char* what) {
  if (f.size() < lo) throw ParseError(std::string(what) + ": too few fields", line.size());
  if (f.size() > hi) throw ParseError(std::string(what) + ": too many fields", f[hi].offset);
}

double num(const Field& f, const char* what) {
  const auto v = text::to_double(f.text);
  if (!v) throw ParseError(std::string("bad ") + what, f.offset);
  return *v;
}

long long integer(const Field& f, const char* what) {
  const auto v = text::to_int(f.text);
  if (!v) throw ParseError(std::string("bad ") + what, f.offset);
  return *v;
}

std::uint64_t seq_of(const Field& f) {
  const auto v = text::to_int(f.text);
  if (!v || *v <= 0) throw ParseError("bad seq", f.offset);
  return static_cast<std::uint64_t>(*v);
}

Timestamp ts_of(const Field& f) {
  try {
    return parse_iso8601(f.text);
  } catch (const ParseError& e) {
    throw ParseError("bad timestamp", f.offset + e.offset());
  }
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("cannot encode non-finite ") + what);
}

std::string int_field(double v) {
  check_finite(v, "sensor value");
  const double t = std::trunc(v);
  return std::to_string(static_cast<long long>(t));
}

std::string one_line(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::optional<mission::VehicleStatus> parse_status(std::string_view s) {
  using VS = mission::VehicleStatus;
  for (auto v : {VS::OnGround, VS::Airborne, VS::Landed, VS::Crashed}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

Position position_of(const Field& lat, const Field& lon, const Field& alt) {
  Position p{num(lat, "latitude"), num(lon, "longitude"), num(alt, "altitude")};
  if (std::abs(p.lat) > 90) throw ParseError("latitude out of range", lat.offset);
  if (std::abs(p.lon) > 180) throw ParseError("longitude out of range", lon.offset);
  return p;
}

std::string position_text(const Position& p) {
  check_finite(p.lat, "latitude");
  check_finite(p.lon, "longitude");
  check_finite(p.alt, "altitude");
  return text::fixed(p.lat, 7) + ' ' + text::fixed(p.lon, 7) + ' ' + text::fixed(p.alt, 2);
}

}  // namespace

std::string_view to_string(CommandKind k) {
  switch (k) {
    case CommandKind::StartData: return "START_DATA";
    case CommandKind::StopData: return "STOP_DATA";
    case CommandKind::StartVideo: return "START_VIDEO";
    case CommandKind::StopVideo: return "STOP_VIDEO";
    case CommandKind::SetMode: return "SET_MODE";
    case CommandKind::UploadMission: return "UPLOAD_MISSION";
    case CommandKind::Rtb: return "RTB";
  }
  return "?";
}

std::optional<CommandKind> parse_command_kind(std::string_view s) {
  for (auto k : {CommandKind::StartData, CommandKind::StopData, CommandKind::StartVideo, CommandKind::StopVideo,
                 CommandKind::SetMode, CommandKind::UploadMission, CommandKind::Rtb}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string encode_frame(const sensors::SensorFrame& f, const Position& pos, Timestamp ts) {
  std::string out = "D ";
  out += format_iso8601(ts);
  out += ' ';
  out += position_text(pos);
  for (auto p : {Parameter::Humidity, Parameter::Temperature, Parameter::Dust, Parameter::O3, Parameter::CO2}) {
    check_finite(f.value(p), "sensor value");
    out += ' ';
    out += text::fixed(f.value(p), 2);
  }
  for (auto p : {Parameter::CO, Parameter::LPG, Parameter::Smoke}) {
    out += ' ';
    out += int_field(f.value(p));
  }
  if (!f.valid) out += " W";
  out += '\n';
  return out;
}

DataLine decode_frame(std::string_view line) {
  line = rtrim(line);
  if (line.size() < 2 || line[0] != 'D' || line[1] != ' ') throw ParseError("data line must start with 'D '", 0);
  const auto f = fields_of(line);
  expect_count(f, 13, 14, line, "data line");
  DataLine d;
  d.ts = ts_of(f[1]);
  d.pos = position_of(f[2], f[3], f[4]);
  static constexpr Parameter kDecimal[] = {Parameter::Humidity, Parameter::Temperature, Parameter::Dust, Parameter::O3,
                                           Parameter::CO2};
  static constexpr Parameter kInteger[] = {Parameter::CO, Parameter::LPG, Parameter::Smoke};
  for (std::size_t i = 0; i < 5; ++i) d.frame.set(kDecimal[i], num(f[5 + i], "sensor field"));
  for (std::size_t i = 0; i < 3; ++i) d.frame.set(kInteger[i], static_cast<double>(integer(f[10 + i], "integer sensor field")));
  d.frame.valid = true;
  if (f.size() == 14) {
    if (f[13].text != "W") throw ParseError("unexpected trailing field", f[13].offset);
    d.frame.valid = false;
  }
  return d;
}

DataLine quantize(const DataLine& d) { return decode_frame(encode_frame(d.frame, d.pos, d.ts)); }

std::string encode(const Message& m) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DataLine>) {
          return encode_frame(v.frame, v.pos, v.ts);
        } else if constexpr (std::is_same_v<T, Command>) {
          std::string out = "C " + std::to_string(v.seq) + ' ' + std::string(to_string(v.kind));
          if (v.kind == CommandKind::SetMode) {
            if (!v.mode) throw DomainError("SET_MODE without a mode");
            out += ' ';
            out += to_string(*v.mode);
          } else if (v.kind == CommandKind::UploadMission) {
            if (v.mission_json.empty() || v.mission_json.find('\n') != std::string::npos) {
              throw DomainError("UPLOAD_MISSION needs single-line JSON");
            }
            out += ' ';
            out += v.mission_json;
          }
          return out + '\n';
        } else if constexpr (std::is_same_v<T, Ack>) {
          std::string out = "A " + std::to_string(v.seq) + (v.ok ? " OK" : " ERR");
          if (!v.ok) out += ' ' + (v.message.empty() ? std::string("error") : one_line(v.message));
          return out + '\n';
        } else if constexpr (std::is_same_v<T, Heartbeat>) {
          return "H " + std::to_string(v.unix_ms) + '\n';
        } else if constexpr (std::is_same_v<T, StatusLine>) {
          std::string out = "S " + format_iso8601(v.ts) + ' ' + std::string(to_string(v.mode)) + ' ' +
                            std::string(to_string(v.status)) + ' ' + position_text(v.pos);
          out += ' ' + text::fixed(v.heading_deg, 1) + ' ' + text::fixed(v.airspeed_mps, 2) + ' ' +
                 text::fixed(v.battery_mah, 1) + ' ' + text::fixed(v.throttle_pct, 1) + (v.link_ok ? " 1 " : " 0 ") +
                 std::to_string(v.target_index);
          return out + '\n';
        } else {
          return "V " + std::to_string(v.frame_no) + ' ' + std::to_string(v.source_unix_ms) + ' ' +
                 std::to_string(v.length) + '\n';
        }
      },
      m);
}

Message decode(std::string_view line) {
  line = rtrim(line);
  if (line.size() < 3 || line[1] != ' ') throw ParseError("expected '<tag> ...'", line.size() < 2 ? line.size() : 1);
  switch (line[0]) {
    case 'D':
      return decode_frame(line);
    case 'C': {
      auto f = fields_of(line, 4);
      if (f.size() < 3) throw ParseError("command: too few fields", line.size());
      Command c;
      c.seq = seq_of(f[1]);
      // the kind token ends at the first space of the optional argument
      auto kind_text = f[2].text;
      std::optional<Field> arg;
      if (f.size() == 4) arg = f[3];
      if (const auto sp = kind_text.find(' '); sp != std::string_view::npos) kind_text = kind_text.substr(0, sp);
      const auto kind = parse_command_kind(kind_text);
      if (!kind) throw ParseError("unknown command kind", f[2].offset);
      c.kind = *kind;
      if (c.kind == CommandKind::SetMode) {
        if (!arg) throw ParseError("SET_MODE needs a mode", line.size());
        const auto mode = mission::parse_mode(arg->text);
        if (!mode) throw ParseError("unknown flight mode", arg->offset);
        c.mode = *mode;
      } else if (c.kind == CommandKind::UploadMission) {
        if (!arg || arg->text.empty()) throw ParseError("UPLOAD_MISSION needs mission JSON", line.size());
        c.mission_json = std::string(arg->text);
      } else if (arg) {
        throw ParseError("command takes no argument", arg->offset);
      }
      return c;
    }
    case 'A': {
      const auto f = fields_of(line, 4);
      if (f.size() < 3) throw ParseError("ack: too few fields", line.size());
      Ack a;
      a.seq = seq_of(f[1]);
      if (f[2].text == "OK") {
        if (f.size() > 3) throw ParseError("ack OK takes no message", f[3].offset);
        a.ok = true;
      } else if (f[2].text == "ERR") {
        if (f.size() < 4 || f[3].text.empty()) throw ParseError("ack ERR needs a message", line.size());
        a.ok = false;
        a.message = std::string(f[3].text);
      } else {
        throw ParseError("ack status must be OK or ERR", f[2].offset);
      }
      return a;
    }
    case 'H': {
      const auto f = fields_of(line);
      expect_count(f, 2, 2, line, "heartbeat");
      return Heartbeat{integer(f[1], "heartbeat time")};
    }
    case 'S': {
      const auto f = fields_of(line);
      expect_count(f, 13, 13, line, "status line");
      StatusLine s;
      s.ts = ts_of(f[1]);
      const auto mode = mission::parse_mode(f[2].text);
      if (!mode) throw ParseError("unknown flight mode", f[2].offset);
      s.mode = *mode;
      const auto st = parse_status(f[3].text);
      if (!st) throw ParseError("unknown vehicle status", f[3].offset);
      s.status = *st;
      s.pos = position_of(f[4], f[5], f[6]);
      s.heading_deg = num(f[7], "heading");
      s.airspeed_mps = num(f[8], "airspeed");
      s.battery_mah = num(f[9], "battery");
      s.throttle_pct = num(f[10], "throttle");
      if (f[11].text != "0" && f[11].text != "1") throw ParseError("link flag must be 0 or 1", f[11].offset);
      s.link_ok = f[11].text == "1";
      const auto ti = integer(f[12], "target index");
      if (ti < 0) throw ParseError("bad target index", f[12].offset);
      s.target_index = static_cast<std::uint64_t>(ti);
      return s;
    }
    case 'V': {
      const auto f = fields_of(line);
      expect_count(f, 4, 4, line, "video header");
      VideoHeader v;
      const auto n = integer(f[1], "frame number");
      const auto len = integer(f[3], "payload length");
      if (n < 0) throw ParseError("bad frame number", f[1].offset);
      if (len < 0 || static_cast<std::size_t>(len) > kMaxVideoBytes) throw ParseError("bad payload length", f[3].offset);
      v.frame_no = static_cast<std::uint64_t>(n);
      v.source_unix_ms = integer(f[2], "source time");
      v.length = static_cast<std::size_t>(len);
      return v;
    }
    default:
      throw ParseError("unknown message tag", 0);
  }
}

bool valid_identifier(std::string_view s) {
  if (s.empty() || s.size() > 64) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

std::string encode_hello(const Hello& h) {
  if (!valid_identifier(h.token)) throw DomainError("hello: invalid token");
  if (h.role == Hello::Role::Uav) {
    if (!valid_identifier(h.uav_id)) throw DomainError("hello: invalid uav id");
    return "HELLO UAV " + h.uav_id + ' ' + h.token + ' ' + std::to_string(h.version) + '\n';
  }
  return "HELLO GROUND " + h.token + ' ' + std::to_string(h.version) + '\n';
}

Hello decode_hello(std::string_view line) {
  line = rtrim(line);
  const auto f = fields_of(line);
  if (f.empty() || f[0].text != "HELLO") throw ParseError("expected HELLO", 0);
  if (f.size() < 2) throw ParseError("hello: missing role", line.size());
  Hello h;
  std::size_t i = 2;
  if (f[1].text == "UAV") {
    h.role = Hello::Role::Uav;
    expect_count(f, 5, 5, line, "hello");
    if (!valid_identifier(f[2].text)) throw ParseError("hello: invalid uav id", f[2].offset);
    h.uav_id = std::string(f[2].text);
    i = 3;
  } else if (f[1].text == "GROUND") {
    h.role = Hello::Role::Ground;
    expect_count(f, 4, 4, line, "hello");
  } else {
    throw ParseError("hello: unknown role", f[1].offset);
  }
  if (!valid_identifier(f[i].text)) throw ParseError("hello: invalid token", f[i].offset);
  h.token = std::string(f[i].text);
  const auto v = integer(f[i + 1], "protocol version");
  h.version = static_cast<int>(v);
  return h;
}

std::string wrap(std::string_view uav_id, std::string_view inner) {
  inner = rtrim(inner);
  std::string out = "U ";
  out += uav_id;
  out += ' ';
  out += inner;
  out += '\n';
  return out;
}

Envelope unwrap(std::string_view line) {
  line = rtrim(line);
  if (line.size() < 2 || line[0] != 'U' || line[1] != ' ') throw ParseError("envelope must start with 'U '", 0);
  const auto sp = line.find(' ', 2);
  if (sp == std::string_view::npos || sp + 1 >= line.size()) throw ParseError("envelope: missing inner message", line.size());
  const auto id = line.substr(2, sp - 2);
  if (!valid_identifier(id)) throw ParseError("envelope: invalid uav id", 2);
  return {std::string(id), std::string(line.substr(sp + 1))};
}

std::optional<std::size_t> video_payload_length(std::string_view line) {
  line = rtrim(line);
  std::size_t base = 0;
  if (line.size() >= 2 && line[0] == 'U' && line[1] == ' ') {
    const auto sp = line.find(' ', 2);
    if (sp == std::string_view::npos) return std::nullopt;
    base = sp + 1;
  }
  const auto inner = line.substr(base);
  if (inner.size() < 2 || inner[0] != 'V' || inner[1] != ' ') return std::nullopt;
  try {
    return std::get<VideoHeader>(decode(inner)).length;
  } catch (const ParseError& e) {
    throw ParseError(std::string("malformed video header: ") + e.what(), base + e.offset());
  }
}

void StreamDecoder::feed(std::string_view bytes) {
  if (pos_ > 0 && pos_ >= buf_.size() / 2) {
    buf_.erase(0, pos_);
    scanned_ -= pos_;
    pos_ = 0;
  }
  buf_.append(bytes);
}

std::optional<StreamDecoder::Item> StreamDecoder::next() {
  const auto nl = buf_.find('\n', std::max(scanned_, pos_));
  if (nl == std::string::npos) {
    scanned_ = buf_.size();
    if (buf_.size() - pos_ > kMaxLineBytes) throw ParseError("line exceeds maximum length", buf_.size() - pos_);
    return std::nullopt;
  }
  std::string_view line(buf_.data() + pos_, nl - pos_);
  if (line.size() > kMaxLineBytes) throw ParseError("line exceeds maximum length", kMaxLineBytes);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto len = video_payload_length(line);
  const std::size_t need = len.value_or(0);
  if (buf_.size() - (nl + 1) < need) {
    scanned_ = nl;  // header found, wait for the payload
    return std::nullopt;
  }
  Item item{std::string(line), buf_.substr(nl + 1, need)};
  pos_ = nl + 1 + need;
  scanned_ = pos_;
  return item;
}

}  // namespace aqsim::telemetry
