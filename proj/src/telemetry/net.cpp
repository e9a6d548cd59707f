#include "aqsim/telemetry/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <system_error>

#include "aqsim/common/error.hpp"
#include "aqsim/common/text.hpp"

namespace aqsim::telemetry {

namespace {

[[noreturn]] void throw_errno(const std::string& what) { throw std::system_error(errno, std::generic_category(), what); }

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  const std::string host = ep.host.empty() || ep.host == "*" ? "0.0.0.0" : ep.host;
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw std::system_error(std::make_error_code(std::errc::host_unreachable), "cannot resolve " + host);
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

}  // namespace

Endpoint parse_endpoint(std::string_view text) {
  Endpoint ep;
  const auto colon = text.rfind(':');
  std::string_view port_text = text;
  if (colon != std::string_view::npos) {
    ep.host = std::string(text.substr(0, colon));
    if (ep.host.empty()) ep.host = "127.0.0.1";
    port_text = text.substr(colon + 1);
  }
  const auto port = text::to_int(port_text);
  if (!port || *port < 0 || *port > 65535) {
    throw ParseError("endpoint must be host:port", colon == std::string_view::npos ? 0 : colon + 1);
  }
  ep.port = static_cast<std::uint16_t>(*port);
  return ep;
}

std::string to_string(const Endpoint& e) { return e.host + ':' + std::to_string(e.port); }

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.fd_;
    o.fd_ = -1;
  }
  return *this;
}

bool Socket::send_all(std::string_view bytes) {
  while (!bytes.empty()) {
    const auto n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::optional<std::size_t> Socket::recv_some(char* buf, std::size_t cap, int timeout_ms) {
  pollfd p{fd_, POLLIN, 0};
  for (;;) {
    const int r = ::poll(&p, 1, timeout_ms);
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) return 0;
    if (r == 0) return std::nullopt;
    break;
  }
  for (;;) {
    const auto n = ::recv(fd_, buf, cap, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return 0;
    return static_cast<std::size_t>(n);
  }
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::set_send_timeout_ms(int ms) {
  timeval tv{ms / 1000, (ms % 1000) * 1000};
  ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

Socket tcp_connect(const Endpoint& ep, int timeout_ms) {
  const auto addr = resolve(ep);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw_errno("socket");
  const int flags = ::fcntl(s.fd(), F_GETFL);
  ::fcntl(s.fd(), F_SETFL, flags | O_NONBLOCK);
  if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
    if (errno != EINPROGRESS) throw_errno("connect " + to_string(ep));
    pollfd p{s.fd(), POLLOUT, 0};
    const int r = ::poll(&p, 1, timeout_ms);
    if (r <= 0) throw std::system_error(std::make_error_code(std::errc::timed_out), "connect " + to_string(ep));
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) throw std::system_error(err, std::generic_category(), "connect " + to_string(ep));
  }
  ::fcntl(s.fd(), F_SETFL, flags);
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

Listener::Listener(const Endpoint& ep) {
  const auto addr = resolve(ep);
  sock_ = Socket(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!sock_.valid()) throw_errno("socket");
  const int one = 1;
  ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(sock_.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) throw_errno("bind " + to_string(ep));
  if (::listen(sock_.fd(), 64) < 0) throw_errno("listen");
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

std::optional<Socket> Listener::accept(int timeout_ms) {
  if (!sock_.valid()) return std::nullopt;
  pollfd p{sock_.fd(), POLLIN, 0};
  const int r = ::poll(&p, 1, timeout_ms);
  if (r <= 0) return std::nullopt;
  const int fd = ::accept4(sock_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) return std::nullopt;
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Socket(fd);
}

}  // namespace aqsim::telemetry
