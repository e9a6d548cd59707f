#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aqsim/mission/types.hpp"

namespace aqsim::mission {

/// One line of the event log: "<t_s> <KIND> key=value key=value...".
/// t_s is simulation time with millisecond precision; kinds are upper-case
/// words, keys and values contain no whitespace.
struct LogRecord {
  double t_s = 0;
  std::string kind;
  std::vector<std::pair<std::string, std::string>> fields;

  /// Throws std::out_of_range when the key is missing.
  const std::string& at(std::string_view key) const;
  bool has(std::string_view key) const;
};

std::string format_record(const LogRecord& r);

/// Throws ParseError; the message names `line_no` (1-based).
LogRecord parse_record(std::string_view line, std::size_t line_no);

LogRecord to_record(const Event& e);

}  // namespace aqsim::mission
