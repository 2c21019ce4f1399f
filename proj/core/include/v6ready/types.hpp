#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace v6ready {

/// RR type as its 16-bit wire value. Unknown values pass through as "TYPEnnn".
struct RRType {
  std::uint16_t value = 0;

  constexpr RRType() = default;
  constexpr explicit RRType(std::uint16_t v) : value(v) {}

  std::string to_string() const;
  /// Accepts mnemonics (case-insensitive) and the RFC 3597 "TYPEnnn" form.
  static std::optional<RRType> parse(std::string_view text);

  friend constexpr auto operator<=>(RRType, RRType) = default;
};

namespace rrtype {
inline constexpr RRType A{1};
inline constexpr RRType NS{2};
inline constexpr RRType CNAME{5};
inline constexpr RRType SOA{6};
inline constexpr RRType MX{15};
inline constexpr RRType TXT{16};
inline constexpr RRType AAAA{28};
inline constexpr RRType OPT{41};
}  // namespace rrtype

struct RRClass {
  std::uint16_t value = 1;

  constexpr RRClass() = default;
  constexpr explicit RRClass(std::uint16_t v) : value(v) {}
  std::string to_string() const;

  friend constexpr auto operator<=>(RRClass, RRClass) = default;
};

namespace rrclass {
inline constexpr RRClass IN{1};
inline constexpr RRClass CH{3};
}  // namespace rrclass

enum class IpFamily : std::uint8_t { v4, v6 };

std::string_view to_string(IpFamily f);
std::optional<IpFamily> parse_family(std::string_view text);
inline constexpr IpFamily other(IpFamily f) { return f == IpFamily::v4 ? IpFamily::v6 : IpFamily::v4; }
/// A for IPv4, AAAA for IPv6.
inline constexpr RRType address_type(IpFamily f) { return f == IpFamily::v4 ? rrtype::A : rrtype::AAAA; }

class IpAddress {
 public:
  IpAddress() = default;  // 0.0.0.0

  static IpAddress v4(std::array<std::uint8_t, 4> bytes);
  static IpAddress v6(std::array<std::uint8_t, 16> bytes);
  /// Exactly 4 or 16 bytes; anything else is rejected.
  static std::optional<IpAddress> from_bytes(std::span<const std::uint8_t> bytes);
  static std::optional<IpAddress> parse(std::string_view text);

  IpFamily family() const noexcept { return family_; }
  std::span<const std::uint8_t> bytes() const noexcept {
    return {bytes_.data(), family_ == IpFamily::v4 ? 4u : 16u};
  }
  std::string to_string() const;

  bool is_unspecified() const noexcept;
  bool is_multicast() const noexcept;
  /// Usable as a nameserver address ("::" and multicast are not).
  bool is_usable() const noexcept { return !is_unspecified() && !is_multicast(); }

  friend auto operator<=>(const IpAddress&, const IpAddress&) = default;
  friend bool operator==(const IpAddress&, const IpAddress&) = default;

 private:
  IpFamily family_ = IpFamily::v4;
  std::array<std::uint8_t, 16> bytes_{};
};

struct IpAddressHash {
  std::size_t operator()(const IpAddress& a) const noexcept;
};

}  // namespace v6ready
