#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "v6ready/name.hpp"
#include "v6ready/record.hpp"
#include "v6ready/types.hpp"

namespace v6ready {

class WireError : public std::runtime_error {
 public:
  enum class Code { Truncated, BadPointer, BadLabel, NameTooLong, MessageTooLarge, BadRdata, Trailing };

  WireError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

enum class Rcode : std::uint8_t {
  NoError = 0,
  FormErr = 1,
  ServFail = 2,
  NXDomain = 3,
  NotImp = 4,
  Refused = 5,
};

struct Question {
  DomainName name;
  RRType type;
  RRClass rrclass = rrclass::IN;

  friend bool operator==(const Question&, const Question&) = default;
};

struct Edns {
  std::uint16_t udp_payload_size = 1232;

  friend bool operator==(const Edns&, const Edns&) = default;
};

struct DnsMessage {
  std::uint16_t id = 0;
  bool qr = false;
  std::uint8_t opcode = 0;
  bool aa = false;
  bool tc = false;
  bool rd = false;
  bool ra = false;
  Rcode rcode = Rcode::NoError;
  std::optional<Question> question;
  std::vector<ResourceRecord> answer;
  std::vector<ResourceRecord> authority;
  std::vector<ResourceRecord> additional;
  std::optional<Edns> edns;

  static DnsMessage make_query(const DomainName& qname, RRType qtype, RRClass qclass = rrclass::IN,
                               std::uint16_t id = 0);
  /// Response skeleton echoing id, question and EDNS presence.
  static DnsMessage make_response(const DnsMessage& query);

  friend bool operator==(const DnsMessage&, const DnsMessage&) = default;
};

inline constexpr std::size_t kMaxTcpMessage = 65535;

/// Uncompressed RFC 1035 encoding; an OPT record is appended iff edns is set.
std::vector<std::uint8_t> encode(const DnsMessage& msg);
/// Accepts name compression. The first OPT in the additional section becomes
/// `edns` and is removed from `additional`.
DnsMessage decode(std::span<const std::uint8_t> wire);

std::string_view to_string(Rcode rc);

}  // namespace v6ready
