#include "v6ready/types.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>

namespace v6ready {

namespace {

struct Mnemonic {
  std::uint16_t value;
  std::string_view name;
};

constexpr Mnemonic kTypes[] = {
    {1, "A"},   {2, "NS"},  {5, "CNAME"}, {6, "SOA"}, {12, "PTR"},  {15, "MX"},
    {16, "TXT"}, {28, "AAAA"}, {33, "SRV"}, {41, "OPT"}, {43, "DS"},   {46, "RRSIG"},
    {48, "DNSKEY"}, {255, "ANY"},
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) == std::toupper(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string RRType::to_string() const {
  for (const auto& m : kTypes)
    if (m.value == value) return std::string(m.name);
  return "TYPE" + std::to_string(value);
}

std::optional<RRType> RRType::parse(std::string_view text) {
  for (const auto& m : kTypes)
    if (iequals(m.name, text)) return RRType{m.value};
  if (text.size() > 4 && iequals(text.substr(0, 4), "TYPE")) {
    unsigned v = 0;
    auto digits = text.substr(4);
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec == std::errc{} && p == digits.data() + digits.size() && v <= 0xffff)
      return RRType{static_cast<std::uint16_t>(v)};
  }
  return std::nullopt;
}

std::string RRClass::to_string() const {
  switch (value) {
    case 1: return "IN";
    case 3: return "CH";
    default: return "CLASS" + std::to_string(value);
  }
}

std::string_view to_string(IpFamily f) { return f == IpFamily::v4 ? "v4" : "v6"; }

std::optional<IpFamily> parse_family(std::string_view text) {
  if (iequals(text, "v4") || iequals(text, "ipv4") || text == "4") return IpFamily::v4;
  if (iequals(text, "v6") || iequals(text, "ipv6") || text == "6") return IpFamily::v6;
  return std::nullopt;
}

IpAddress IpAddress::v4(std::array<std::uint8_t, 4> bytes) {
  IpAddress a;
  a.family_ = IpFamily::v4;
  std::copy(bytes.begin(), bytes.end(), a.bytes_.begin());
  return a;
}

IpAddress IpAddress::v6(std::array<std::uint8_t, 16> bytes) {
  IpAddress a;
  a.family_ = IpFamily::v6;
  a.bytes_ = bytes;
  return a;
}

std::optional<IpAddress> IpAddress::from_bytes(std::span<const std::uint8_t> bytes) {
  IpAddress a;
  if (bytes.size() == 4) {
    a.family_ = IpFamily::v4;
  } else if (bytes.size() == 16) {
    a.family_ = IpFamily::v6;
  } else {
    return std::nullopt;
  }
  std::copy(bytes.begin(), bytes.end(), a.bytes_.begin());
  return a;
}

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
  std::string s(text);
  std::array<std::uint8_t, 16> buf{};
  if (s.find(':') != std::string::npos) {
    if (inet_pton(AF_INET6, s.c_str(), buf.data()) != 1) return std::nullopt;
    return v6(buf);
  }
  if (inet_pton(AF_INET, s.c_str(), buf.data()) != 1) return std::nullopt;
  return v4({buf[0], buf[1], buf[2], buf[3]});
}

std::string IpAddress::to_string() const {
  char out[INET6_ADDRSTRLEN] = {};
  inet_ntop(family_ == IpFamily::v4 ? AF_INET : AF_INET6, bytes_.data(), out, sizeof out);
  return out;
}

bool IpAddress::is_unspecified() const noexcept {
  auto b = bytes();
  return std::all_of(b.begin(), b.end(), [](std::uint8_t x) { return x == 0; });
}

bool IpAddress::is_multicast() const noexcept {
  if (family_ == IpFamily::v4) return (bytes_[0] & 0xf0) == 0xe0;
  return bytes_[0] == 0xff;
}

std::size_t IpAddressHash::operator()(const IpAddress& a) const noexcept {
  std::size_t h = static_cast<std::size_t>(a.family()) + 0x9e3779b97f4a7c15ULL;
  for (auto b : a.bytes()) h = (h ^ b) * 0x100000001b3ULL;
  return h;
}

}  // namespace v6ready
