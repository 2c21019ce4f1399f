#include "v6ready/zone_data.hpp"

namespace v6ready {

const NameSet* ZoneRecordSet::ns_view(const DomainName& bailiwick) const {
  auto it = ns_by_bailiwick.find(bailiwick);
  return it == ns_by_bailiwick.end() ? nullptr : &it->second;
}

NameSet ZoneRecordSet::all_ns() const {
  NameSet out;
  for (const auto& [_, names] : ns_by_bailiwick) out.insert(names.begin(), names.end());
  return out;
}

ZoneDataset::ZoneDataset() = default;

bool ZoneDataset::add_ns(const DomainName& zone, const DomainName& bailiwick,
                         const DomainName& ns) {
  if (!is_in_bailiwick(zone, bailiwick)) {
    auto rr = ResourceRecord::ns(zone, ns);
    rr.bailiwick = bailiwick;
    untrusted_.push_back(std::move(rr));
    return false;
  }
  auto& rs = zones_[zone];
  rs.zone = zone;
  rs.ns_by_bailiwick[bailiwick].insert(ns);
  return true;
}

bool ZoneDataset::add_address(const DomainName& name, const DomainName& bailiwick,
                              const IpAddress& addr) {
  if (!is_in_bailiwick(name, bailiwick)) {
    auto rr = ResourceRecord::address(name, addr);
    rr.bailiwick = bailiwick;
    untrusted_.push_back(std::move(rr));
    return false;
  }
  addresses_[name][bailiwick].insert(addr);
  return true;
}

void ZoneDataset::finalize() {
  NameSet referenced;
  for (auto& [zone, rs] : zones_) {
    rs.addr_by_bailiwick.clear();
    for (const auto& ns : rs.all_ns()) {
      referenced.insert(ns);
      auto it = addresses_.find(ns);
      if (it == addresses_.end()) continue;
      for (const auto& [bw, addrs] : it->second) rs.addr_by_bailiwick[{ns, bw}] = addrs;
    }
  }
  orphans_.clear();
  for (const auto& [name, _] : addresses_)
    if (!referenced.count(name)) orphans_.insert(name);
}

const ZoneRecordSet* ZoneDataset::find(const DomainName& zone) const {
  auto it = zones_.find(zone);
  return it == zones_.end() ? nullptr : &it->second;
}

bool ZoneDataset::contains(const DomainName& zone) const {
  return zone.is_root() || zones_.count(zone) > 0;
}

std::optional<DomainName> ZoneDataset::parent_of(const DomainName& zone) const {
  if (zone.is_root()) return std::nullopt;
  const auto* rs = find(zone);
  if (!rs) return std::nullopt;
  std::optional<DomainName> best;
  for (const auto& [bw, names] : rs->ns_by_bailiwick) {
    if (bw == zone || names.empty()) continue;
    if (!best || bw.label_count() > best->label_count()) best = bw;
  }
  if (best && contains(*best)) return best;
  return std::nullopt;
}

DomainName ZoneDataset::zone_of(const DomainName& name) const {
  for (std::size_t n = name.label_count(); n > 0; --n) {
    auto candidate = name.suffix(n);
    if (zones_.count(candidate)) return candidate;
  }
  return DomainName::root();
}

bool ZoneDataset::has_address(const DomainName& name, const DomainName& bailiwick,
                              IpFamily family) const {
  auto it = addresses_.find(name);
  if (it == addresses_.end()) return false;
  auto jt = it->second.find(bailiwick);
  if (jt == it->second.end()) return false;
  for (const auto& a : jt->second)
    if (a.family() == family) return true;
  return false;
}

bool ZoneDataset::has_any_address(const DomainName& name, IpFamily family) const {
  auto it = addresses_.find(name);
  if (it == addresses_.end()) return false;
  for (const auto& [_, addrs] : it->second)
    for (const auto& a : addrs)
      if (a.family() == family) return true;
  return false;
}

AddressSet ZoneDataset::addresses(const DomainName& name, const DomainName& bailiwick,
                                  IpFamily family) const {
  AddressSet out;
  auto it = addresses_.find(name);
  if (it == addresses_.end()) return out;
  auto jt = it->second.find(bailiwick);
  if (jt == it->second.end()) return out;
  for (const auto& a : jt->second)
    if (a.family() == family) out.insert(a);
  return out;
}

AddressSet ZoneDataset::all_addresses(const DomainName& name) const {
  AddressSet out;
  auto it = addresses_.find(name);
  if (it == addresses_.end()) return out;
  for (const auto& [_, addrs] : it->second) out.insert(addrs.begin(), addrs.end());
  return out;
}

}  // namespace v6ready
