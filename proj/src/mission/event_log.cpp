#include "aqsim/mission/event_log.hpp"

#include <stdexcept>

#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"

namespace aqsim::mission {

const std::string& LogRecord::at(std::string_view key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  throw std::out_of_range("log record " + kind + " has no field '" + std::string(key) + "'");
}

bool LogRecord::has(std::string_view key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return true;
  }
  return false;
}

std::string format_record(const LogRecord& r) {
  std::string out = text::fixed(r.t_s, 3);
  out += ' ';
  out += r.kind;
  for (const auto& [k, v] : r.fields) {
    out += ' ';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

LogRecord parse_record(std::string_view line, std::size_t line_no) {
  const std::string where = "line " + std::to_string(line_no) + ": ";
  const auto f = text::split(line, ' ');
  if (f.size() < 2 || f[0].empty() || f[1].empty()) throw ParseError(where + "expected '<time> <KIND> ...'", 0);
  LogRecord r;
  const auto t = text::to_double(f[0]);
  if (!t || *t < 0) throw ParseError(where + "bad timestamp", 0);
  r.t_s = *t;
  for (char c : f[1]) {
    if (!((c >= 'A' && c <= 'Z') || c == '_')) throw ParseError(where + "bad record kind", f[0].size() + 1);
  }
  r.kind = std::string(f[1]);
  std::size_t offset = f[0].size() + f[1].size() + 2;
  for (std::size_t i = 2; i < f.size(); ++i) {
    const auto eq = f[i].find('=');
    if (eq == std::string_view::npos || eq == 0) throw ParseError(where + "expected key=value", offset);
    r.fields.emplace_back(std::string(f[i].substr(0, eq)), std::string(f[i].substr(eq + 1)));
    offset += f[i].size() + 1;
  }
  return r;
}

LogRecord to_record(const Event& e) {
  LogRecord r;
  r.t_s = e.t_s;
  r.kind = std::string(to_string(e.kind));
  switch (e.kind) {
    case EventKind::ModeChange:
      r.fields = {{"from", std::string(to_string(e.from))}, {"to", std::string(to_string(e.to))}, {"reason", e.reason}};
      break;
    case EventKind::WaypointReached:
      r.fields = {{"index", std::to_string(e.waypoint.value_or(0))}, {"distance_m", text::fixed(e.value, 3)}};
      break;
    case EventKind::SteepTurn:
      r.fields = {{"target", std::to_string(e.waypoint.value_or(0))}, {"required_dps", text::fixed(e.value, 2)}};
      break;
    case EventKind::BatteryLow:
    case EventKind::BatteryExhausted:
      r.fields = {{"remaining_mah", text::fixed(e.value, 1)}};
      break;
    case EventKind::CommandRejected: {
      std::string reason = e.reason;
      for (auto& c : reason) {
        if (c == ' ' || c == '\t' || c == '\n') c = '_';
      }
      r.fields = {{"reason", reason}};
      break;
    }
    default:
      break;
  }
  return r;
}

}  // namespace aqsim::mission
