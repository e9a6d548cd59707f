#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace aqsim::telemetry {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// "host:port", ":port" or "port". Throws ParseError.
Endpoint parse_endpoint(std::string_view text);
std::string to_string(const Endpoint& e);

/// Owning TCP socket (POSIX). Move-only.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }

  /// Writes everything or returns false (peer gone or send timeout).
  bool send_all(std::string_view bytes);
  /// Waits up to timeout_ms. Returns bytes read, 0 on orderly close,
  /// nullopt on timeout; -1 is never returned (errors read as close).
  std::optional<std::size_t> recv_some(char* buf, std::size_t cap, int timeout_ms);
  /// Half-close both directions; wakes a blocked reader.
  void shutdown();
  void close();
  void set_send_timeout_ms(int ms);

 private:
  int fd_ = -1;
};

/// Connects with a timeout. Throws std::system_error.
Socket tcp_connect(const Endpoint& ep, int timeout_ms = 2000);

class Listener {
 public:
  /// Binds and listens; port 0 picks a free port. Throws std::system_error.
  explicit Listener(const Endpoint& ep);
  std::uint16_t port() const { return port_; }
  std::optional<Socket> accept(int timeout_ms);
  void close() { sock_.close(); }

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

}  // namespace aqsim::telemetry
