#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "v6ready/name.hpp"
#include "v6ready/types.hpp"

namespace v6ready {

/// Name for NS/CNAME, address for A/AAAA, raw RDATA bytes for everything else.
/// Names embedded in SOA/MX raw data are kept uncompressed.
using RData = std::variant<DomainName, IpAddress, std::vector<std::uint8_t>>;

class RecordError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ResourceRecord {
  DomainName owner;
  RRType type;
  RRClass rrclass = rrclass::IN;
  std::uint32_t ttl = 0;
  RData data;
  /// Zone authoritative for the reply that carried this record. Not on the wire.
  DomainName bailiwick;

  static ResourceRecord ns(DomainName owner, DomainName target, std::uint32_t ttl = 3600);
  static ResourceRecord address(DomainName owner, IpAddress addr, std::uint32_t ttl = 3600);
  static ResourceRecord cname(DomainName owner, DomainName target, std::uint32_t ttl = 3600);
  static ResourceRecord raw(DomainName owner, RRType type, std::vector<std::uint8_t> data,
                            std::uint32_t ttl = 3600, RRClass cls = rrclass::IN);

  /// Throws RecordError when the payload does not match the type.
  void validate() const;

  /// Owner lies outside the bailiwick: retained for reporting, never trusted.
  bool out_of_zone() const noexcept { return !is_in_bailiwick(owner, bailiwick); }

  const DomainName* target() const noexcept { return std::get_if<DomainName>(&data); }
  const IpAddress* address() const noexcept { return std::get_if<IpAddress>(&data); }
  const std::vector<std::uint8_t>* raw_data() const noexcept {
    return std::get_if<std::vector<std::uint8_t>>(&data);
  }

  /// Presentation form of the RDATA (name, address, or type-specific text).
  std::string rdata_text() const;

  friend bool operator==(const ResourceRecord&, const ResourceRecord&) = default;
};

struct SoaData {
  DomainName mname;
  DomainName rname;
  std::uint32_t serial = 0;
  std::uint32_t refresh = 3600;
  std::uint32_t retry = 600;
  std::uint32_t expire = 604800;
  std::uint32_t minimum = 300;

  friend bool operator==(const SoaData&, const SoaData&) = default;
};

struct MxData {
  std::uint16_t preference = 10;
  DomainName exchange;

  friend bool operator==(const MxData&, const MxData&) = default;
};

ResourceRecord make_soa(const DomainName& owner, const SoaData& soa, std::uint32_t ttl = 3600);
ResourceRecord make_mx(const DomainName& owner, const MxData& mx, std::uint32_t ttl = 3600);
ResourceRecord make_txt(const DomainName& owner, const std::vector<std::string>& strings,
                        std::uint32_t ttl = 3600, RRClass cls = rrclass::IN);

SoaData parse_soa(const ResourceRecord& rr);
MxData parse_mx(const ResourceRecord& rr);
std::vector<std::string> parse_txt(const ResourceRecord& rr);

/// Uncompressed wire encoding of a name.
void append_name(std::vector<std::uint8_t>& out, const DomainName& name);

}  // namespace v6ready
