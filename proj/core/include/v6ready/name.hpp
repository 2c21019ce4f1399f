#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace v6ready {

class NameError : public std::runtime_error {
 public:
  enum class Code { EmptyLabel, LabelTooLong, NameTooLong, RootHasNoParent, BadEscape };

  NameError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// A normalized DNS name. Labels are stored lowercase (ASCII only; other bytes
/// are kept verbatim), leftmost label first. The root is the empty label list.
class DomainName {
 public:
  static constexpr std::size_t kMaxLabel = 63;
  static constexpr std::size_t kMaxWire = 255;

  DomainName() = default;

  /// Parses presentation format ("Example.ORG.", "a\.b.c", "\065.x").
  static DomainName parse(std::string_view text);
  static DomainName from_labels(std::vector<std::string> labels);
  static DomainName root() { return {}; }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t label_count() const noexcept { return labels_.size(); }
  bool is_root() const noexcept { return labels_.empty(); }

  /// Drops the leftmost label. Throws NameError(RootHasNoParent) for the root.
  DomainName parent() const;
  DomainName child(std::string_view label) const;
  /// The ancestor made of the rightmost `count` labels.
  DomainName suffix(std::size_t count) const;

  /// Presentation form without the trailing dot; the root renders as ".".
  std::string to_string() const;
  std::string to_fqdn() const;
  std::size_t wire_length() const noexcept;

  /// True if this name equals `zone` or lies below it.
  bool is_subdomain_of(const DomainName& zone) const noexcept;

  friend bool operator==(const DomainName&, const DomainName&) = default;
  /// Canonical order: compares labels right to left, so a zone sorts
  /// immediately before its descendants.
  friend std::strong_ordering operator<=>(const DomainName& a, const DomainName& b) noexcept;

 private:
  explicit DomainName(std::vector<std::string> labels) : labels_(std::move(labels)) {}
  static void validate(const std::vector<std::string>& labels);

  std::vector<std::string> labels_;
};

DomainName normalize(std::string_view text);

/// "The name is within the zone or below."
bool is_in_bailiwick(const DomainName& name, const DomainName& zone) noexcept;

/// Root first, `name` last; one entry per label boundary.
std::vector<DomainName> enclosing_zones(const DomainName& name);

struct DomainNameHash {
  std::size_t operator()(const DomainName& n) const noexcept;
};

}  // namespace v6ready
