#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "v6ready/query.hpp"

namespace v6ready {

struct Endpoint {
  IpAddress address;
  std::uint16_t port = 53;
};

/// Real UDP/TCP exchanges. An optional address map redirects a logical server
/// address to another endpoint (used to talk to loopback mock servers).
class SocketTransport : public Transport {
 public:
  SocketTransport() = default;
  explicit SocketTransport(std::map<IpAddress, Endpoint> remap) : remap_(std::move(remap)) {}

  Reply exchange(const IpAddress& server, TransportKind kind, std::span<const std::uint8_t> query,
                 Millis timeout) override;

 private:
  Endpoint resolve(const IpAddress& server) const;

  std::map<IpAddress, Endpoint> remap_;
};

/// Address map file: one "logical-address target-address port" per line, '#' comments.
std::map<IpAddress, Endpoint> parse_address_map(const std::string& text);
std::string format_address_map(const std::map<IpAddress, Endpoint>& map);

}  // namespace v6ready
