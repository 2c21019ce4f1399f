#include "v6ready/socket_transport.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netinet/in.h>
#include <poll.h>
#include <sstream>
#include <stdexcept>
#include <sys/socket.h>
#include <unistd.h>

namespace v6ready {

namespace {

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

socklen_t to_sockaddr(const Endpoint& ep, sockaddr_storage& ss) {
  std::memset(&ss, 0, sizeof ss);
  auto bytes = ep.address.bytes();
  if (ep.address.family() == IpFamily::v4) {
    auto* sa = reinterpret_cast<sockaddr_in*>(&ss);
    sa->sin_family = AF_INET;
    sa->sin_port = htons(ep.port);
    std::memcpy(&sa->sin_addr, bytes.data(), 4);
    return sizeof(sockaddr_in);
  }
  auto* sa = reinterpret_cast<sockaddr_in6*>(&ss);
  sa->sin6_family = AF_INET6;
  sa->sin6_port = htons(ep.port);
  std::memcpy(&sa->sin6_addr, bytes.data(), 16);
  return sizeof(sockaddr_in6);
}

bool unreachable_errno(int e) {
  return e == ENETUNREACH || e == EHOSTUNREACH || e == EAFNOSUPPORT || e == EADDRNOTAVAIL ||
         e == ECONNREFUSED;
}

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now()).count();
  return left > 0 ? static_cast<int>(left) : 0;
}

bool wait_for(int fd, short events, Clock::time_point deadline) {
  pollfd p{fd, events, 0};
  while (true) {
    int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) return false;
  }
}

bool read_exact(int fd, std::uint8_t* buf, std::size_t n, Clock::time_point deadline) {
  std::size_t got = 0;
  while (got < n) {
    if (!wait_for(fd, POLLIN, deadline)) return false;
    ssize_t r = ::recv(fd, buf + got, n - got, 0);
    if (r <= 0) return false;
    got += static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace

Endpoint SocketTransport::resolve(const IpAddress& server) const {
  auto it = remap_.find(server);
  return it == remap_.end() ? Endpoint{server, 53} : it->second;
}

Transport::Reply SocketTransport::exchange(const IpAddress& server, TransportKind kind,
                                           std::span<const std::uint8_t> query, Millis timeout) {
  Reply reply;
  Endpoint ep = resolve(server);
  sockaddr_storage ss;
  socklen_t len = to_sockaddr(ep, ss);
  int domain = ep.address.family() == IpFamily::v4 ? AF_INET : AF_INET6;
  auto deadline = Clock::now() + timeout;

  if (kind == TransportKind::udp) {
    Fd fd(::socket(domain, SOCK_DGRAM | SOCK_CLOEXEC, 0));
    if (fd.get() < 0) {
      reply.status = Reply::Status::unreachable;
      return reply;
    }
    // Kernel-assigned ephemeral port per exchange.
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&ss), len) != 0 ||
        ::send(fd.get(), query.data(), query.size(), 0) < 0) {
      reply.status = unreachable_errno(errno) ? Reply::Status::unreachable : Reply::Status::timeout;
      return reply;
    }
    std::vector<std::uint8_t> buf(65535);
    if (!wait_for(fd.get(), POLLIN, deadline)) return reply;
    ssize_t r = ::recv(fd.get(), buf.data(), buf.size(), 0);
    if (r < 0) {
      reply.status = unreachable_errno(errno) ? Reply::Status::unreachable : Reply::Status::timeout;
      return reply;
    }
    buf.resize(static_cast<std::size_t>(r));
    reply.status = Reply::Status::ok;
    reply.payload = std::move(buf);
    return reply;
  }

  Fd fd(::socket(domain, SOCK_STREAM | SOCK_CLOEXEC | SOCK_NONBLOCK, 0));
  if (fd.get() < 0) {
    reply.status = Reply::Status::unreachable;
    return reply;
  }
  if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&ss), len) != 0) {
    if (errno != EINPROGRESS) {
      reply.status = unreachable_errno(errno) ? Reply::Status::unreachable : Reply::Status::timeout;
      return reply;
    }
    if (!wait_for(fd.get(), POLLOUT, deadline)) return reply;
    int err = 0;
    socklen_t elen = sizeof err;
    ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &elen);
    if (err != 0) {
      reply.status = unreachable_errno(err) ? Reply::Status::unreachable : Reply::Status::timeout;
      return reply;
    }
  }
  std::vector<std::uint8_t> framed;
  framed.push_back(static_cast<std::uint8_t>(query.size() >> 8));
  framed.push_back(static_cast<std::uint8_t>(query.size() & 0xff));
  framed.insert(framed.end(), query.begin(), query.end());
  std::size_t sent = 0;
  while (sent < framed.size()) {
    if (!wait_for(fd.get(), POLLOUT, deadline)) return reply;
    ssize_t w = ::send(fd.get(), framed.data() + sent, framed.size() - sent, MSG_NOSIGNAL);
    if (w <= 0) return reply;
    sent += static_cast<std::size_t>(w);
  }
  std::uint8_t hdr[2];
  if (!read_exact(fd.get(), hdr, 2, deadline)) return reply;
  std::size_t n = (static_cast<std::size_t>(hdr[0]) << 8) | hdr[1];
  std::vector<std::uint8_t> buf(n);
  if (!read_exact(fd.get(), buf.data(), n, deadline)) return reply;
  reply.status = Reply::Status::ok;
  reply.payload = std::move(buf);
  return reply;
}

std::map<IpAddress, Endpoint> parse_address_map(const std::string& text) {
  std::map<IpAddress, Endpoint> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string from, to;
    unsigned port = 0;
    if (!(ls >> from)) continue;
    if (!(ls >> to >> port) || port == 0 || port > 65535)
      throw std::invalid_argument("address map line " + std::to_string(lineno) + ": expected 3 fields");
    auto a = IpAddress::parse(from);
    auto b = IpAddress::parse(to);
    if (!a || !b)
      throw std::invalid_argument("address map line " + std::to_string(lineno) + ": bad address");
    out[*a] = Endpoint{*b, static_cast<std::uint16_t>(port)};
  }
  return out;
}

std::string format_address_map(const std::map<IpAddress, Endpoint>& map) {
  std::string out;
  for (const auto& [from, ep] : map)
    out += from.to_string() + ' ' + ep.address.to_string() + ' ' + std::to_string(ep.port) + '\n';
  return out;
}

}  // namespace v6ready
