#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "v6ready/name.hpp"
#include "v6ready/record.hpp"
#include "v6ready/types.hpp"

namespace v6ready {

using NameSet = std::set<DomainName>;
using AddressSet = std::set<IpAddress>;

/// Everything observed about one zone: the NS set per responding bailiwick
/// (parent view and the zone's own view may disagree) and the addresses of
/// each NS name, again per bailiwick they were served from.
struct ZoneRecordSet {
  DomainName zone;
  std::map<DomainName, NameSet> ns_by_bailiwick;
  std::map<std::pair<DomainName, DomainName>, AddressSet> addr_by_bailiwick;  // (ns, bailiwick)

  /// NS set served by `bailiwick`, or nullptr if that view was never seen.
  const NameSet* ns_view(const DomainName& bailiwick) const;
  /// Union of all views.
  NameSet all_ns() const;
};

/// A collection of zones plus an index of every trusted A/AAAA observation.
/// Built incrementally with add_ns/add_address, then finalize() attaches the
/// address index to each zone's record set and computes the orphan list.
class ZoneDataset {
 public:
  ZoneDataset();

  /// Returns false (and keeps the record as untrusted) when `bailiwick` is not
  /// an ancestor-or-self of `zone`.
  bool add_ns(const DomainName& zone, const DomainName& bailiwick, const DomainName& ns);
  bool add_address(const DomainName& name, const DomainName& bailiwick, const IpAddress& addr);
  void finalize();

  const std::map<DomainName, ZoneRecordSet>& zones() const noexcept { return zones_; }
  const ZoneRecordSet* find(const DomainName& zone) const;
  /// The root is always considered present.
  bool contains(const DomainName& zone) const;
  std::size_t size() const noexcept { return zones_.size(); }

  /// Deepest proper-ancestor bailiwick that served NS records for `zone` and is
  /// itself a known zone. nullopt means the parent was never observed.
  std::optional<DomainName> parent_of(const DomainName& zone) const;
  /// Deepest known zone at or above `name`.
  DomainName zone_of(const DomainName& name) const;

  bool has_address(const DomainName& name, const DomainName& bailiwick, IpFamily family) const;
  bool has_any_address(const DomainName& name, IpFamily family) const;
  AddressSet addresses(const DomainName& name, const DomainName& bailiwick, IpFamily family) const;
  AddressSet all_addresses(const DomainName& name) const;

  const NameSet& orphans() const noexcept { return orphans_; }
  const std::vector<ResourceRecord>& untrusted() const noexcept { return untrusted_; }

 private:
  std::map<DomainName, ZoneRecordSet> zones_;
  std::map<DomainName, std::map<DomainName, AddressSet>> addresses_;  // name -> bailiwick -> set
  NameSet orphans_;
  std::vector<ResourceRecord> untrusted_;
};

}  // namespace v6ready
