#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aqsim::text {

/// Splits on runs of ASCII spaces/tabs. Empty fields are never produced.
std::vector<std::string_view> split_ws(std::string_view s);

/// Splits on a single delimiter, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char delim);

std::string_view trim(std::string_view s);

std::optional<double> to_double(std::string_view s);
std::optional<long long> to_int(std::string_view s);

/// Fixed-point formatting, e.g. fixed(41.4, 2) == "41.40".
std::string fixed(double v, int decimals);

/// Shortest representation that parses back to exactly `v`.
std::string shortest(double v);

}  // namespace aqsim::text
