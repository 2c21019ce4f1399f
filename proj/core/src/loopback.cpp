#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <system_error>

#include "v6ready/mock_net.hpp"

namespace v6ready {

namespace {

struct Bound {
  int udp = -1;
  int tcp = -1;
  std::uint16_t port = 0;
};

sockaddr_storage loopback_addr(bool v6, std::uint16_t port, socklen_t& len) {
  sockaddr_storage ss{};
  if (v6) {
    auto* s = reinterpret_cast<sockaddr_in6*>(&ss);
    s->sin6_family = AF_INET6;
    s->sin6_addr = in6addr_loopback;
    s->sin6_port = htons(port);
    len = sizeof(sockaddr_in6);
  } else {
    auto* s = reinterpret_cast<sockaddr_in*>(&ss);
    s->sin_family = AF_INET;
    s->sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    s->sin_port = htons(port);
    len = sizeof(sockaddr_in);
  }
  return ss;
}

// UDP and TCP on the same ephemeral port.
Bound bind_pair(bool v6) {
  const int af = v6 ? AF_INET6 : AF_INET;
  for (int attempt = 0; attempt < 32; ++attempt) {
    Bound b;
    b.udp = ::socket(af, SOCK_DGRAM | SOCK_CLOEXEC, 0);
    if (b.udp < 0) throw std::system_error(errno, std::generic_category(), "udp socket");
    socklen_t len;
    auto addr = loopback_addr(v6, 0, len);
    if (::bind(b.udp, reinterpret_cast<sockaddr*>(&addr), len) < 0) {
      int e = errno;
      ::close(b.udp);
      throw std::system_error(e, std::generic_category(), "bind udp");
    }
    sockaddr_storage got{};
    socklen_t glen = sizeof(got);
    ::getsockname(b.udp, reinterpret_cast<sockaddr*>(&got), &glen);
    b.port = ntohs(v6 ? reinterpret_cast<sockaddr_in6*>(&got)->sin6_port : reinterpret_cast<sockaddr_in*>(&got)->sin_port);

    b.tcp = ::socket(af, SOCK_STREAM | SOCK_CLOEXEC, 0);
    int one = 1;
    ::setsockopt(b.tcp, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    auto taddr = loopback_addr(v6, b.port, len);
    if (::bind(b.tcp, reinterpret_cast<sockaddr*>(&taddr), len) == 0 && ::listen(b.tcp, 16) == 0) return b;
    ::close(b.udp);
    ::close(b.tcp);
  }
  throw std::runtime_error("no free loopback port pair");
}

bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    pollfd p{fd, POLLIN, 0};
    if (::poll(&p, 1, 2000) <= 0) return false;
    ssize_t r = ::recv(fd, buf + got, n - got, 0);
    if (r <= 0) return false;
    got += static_cast<std::size_t>(r);
  }
  return true;
}

void write_all(int fd, const std::uint8_t* buf, std::size_t n) {
  std::size_t sent = 0;
  while (sent < n) {
    ssize_t r = ::send(fd, buf + sent, n - sent, MSG_NOSIGNAL);
    if (r <= 0) return;
    sent += static_cast<std::size_t>(r);
  }
}

}  // namespace

LoopbackServer::LoopbackServer(Universe& u, bool prefer_v6_loopback) : u_(u) {
  const auto target = *IpAddress::parse(prefer_v6_loopback ? "::1" : "127.0.0.1");
  try {
    for (const auto& logical : u_.listening()) {
      Bound b = bind_pair(prefer_v6_loopback);
      sockets_.push_back({b.udp, b.tcp, logical});
      map_[logical] = Endpoint{target, b.port};
    }
  } catch (...) {
    stop();
    throw;
  }
  thread_ = std::thread([this] { serve(); });
}

LoopbackServer::~LoopbackServer() { stop(); }

void LoopbackServer::stop() {
  stop_ = true;
  if (thread_.joinable()) thread_.join();
  for (auto& s : sockets_) {
    if (s.udp >= 0) ::close(s.udp);
    if (s.tcp >= 0) ::close(s.tcp);
    s.udp = s.tcp = -1;
  }
}

void LoopbackServer::serve() {
  std::vector<pollfd> fds;
  for (const auto& s : sockets_) {
    fds.push_back({s.udp, POLLIN, 0});
    fds.push_back({s.tcp, POLLIN, 0});
  }
  std::vector<std::uint8_t> buf(65535);
  while (!stop_) {
    int n = ::poll(fds.data(), fds.size(), 50);
    if (n <= 0) continue;
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (!(fds[i].revents & POLLIN)) continue;
      const auto& s = sockets_[i / 2];
      if (i % 2 == 0) {
        sockaddr_storage from{};
        socklen_t flen = sizeof(from);
        ssize_t r = ::recvfrom(s.udp, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &flen);
        if (r <= 0) continue;
        auto reply = u_.respond(s.logical, TransportKind::udp, {buf.data(), static_cast<std::size_t>(r)});
        if (reply) ::sendto(s.udp, reply->data(), reply->size(), 0, reinterpret_cast<sockaddr*>(&from), flen);
      } else {
        int c = ::accept4(s.tcp, nullptr, nullptr, SOCK_CLOEXEC);
        if (c < 0) continue;
        std::uint8_t hdr[2];
        if (read_exact(c, hdr, 2)) {
          std::size_t len = static_cast<std::size_t>(hdr[0]) << 8 | hdr[1];
          if (read_exact(c, buf.data(), len)) {
            auto reply = u_.respond(s.logical, TransportKind::tcp, {buf.data(), len});
            if (reply) {
              std::uint8_t out[2] = {static_cast<std::uint8_t>(reply->size() >> 8),
                                     static_cast<std::uint8_t>(reply->size())};
              write_all(c, out, 2);
              write_all(c, reply->data(), reply->size());
            }
          }
        }
        ::close(c);
      }
    }
  }
}

}  // namespace v6ready
