#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace aqsim {

/// Argument outside the mathematical domain of a model equation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed textual input. `offset` is the byte position where parsing failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// One or more invariant violations collected from a config or request.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& p : items) {
      if (!out.empty()) out += "; ";
      out += p;
    }
    return out;
  }

  std::vector<std::string> problems_;
};

}  // namespace aqsim
