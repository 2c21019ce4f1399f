#include "v6ready/classifier.hpp"

namespace v6ready {

namespace {

bool has_addr(const ZoneRecordSet& rs, const DomainName& ns, const DomainName& bw, IpFamily f) {
  auto it = rs.addr_by_bailiwick.find({ns, bw});
  if (it == rs.addr_by_bailiwick.end()) return false;
  for (const auto& a : it->second)
    if (a.family() == f) return true;
  return false;
}

bool has_addr_anywhere(const ZoneRecordSet& rs, const DomainName& ns, IpFamily f) {
  for (auto it = rs.addr_by_bailiwick.lower_bound({ns, DomainName::root()});
       it != rs.addr_by_bailiwick.end() && it->first.first == ns; ++it)
    for (const auto& a : it->second)
      if (a.family() == f) return true;
  return false;
}

bool ns_resolves(const ZoneRecordSet& rs, const DomainName& ns, const DomainName& view_bw,
                 const EvidenceLookup& lookup, IpFamily f) {
  if (is_in_bailiwick(ns, rs.zone)) return has_addr(rs, ns, view_bw, f);
  DomainName z = lookup.zone_of(ns);
  return lookup.resolves(z, f) && has_addr(rs, ns, z, f);
}

void add_cause(CauseSet& out, CauseKind kind, const DomainName& witness, std::optional<View> view) {
  auto [it, _] = out.try_emplace(kind, FailureCause{kind, {}, {}});
  it->second.witnesses.insert(witness);
  if (view) it->second.views.insert(*view);
}

void diagnose_view(const ZoneRecordSet& rs, const NameSet* names, const DomainName& view_bw,
                   View view, const EvidenceLookup& lookup, IpFamily f, CauseSet& out) {
  if (!names || names->empty()) {
    // Nothing to resolve through: vacuously no address for any NS.
    auto [it, _] = out.try_emplace(CauseKind::NoAAAAForNS, FailureCause{CauseKind::NoAAAAForNS, {}, {}});
    it->second.views.insert(view);
    return;
  }
  for (const auto& ns : *names) {
    if (is_in_bailiwick(ns, rs.zone)) {
      if (has_addr(rs, ns, view_bw, f)) continue;
      if (has_addr_anywhere(rs, ns, f))
        add_cause(out, view == View::parent ? CauseKind::MissingGlue : CauseKind::InBailiwickNSWithoutAAAA,
                  ns, view);
      else
        add_cause(out, CauseKind::NoAAAAForNS, ns, view);
      continue;
    }
    DomainName z = lookup.zone_of(ns);
    if (!lookup.resolves(z, f))
      add_cause(out, CauseKind::OobNSZoneUnresolvable, ns, view);
    else if (!has_addr(rs, ns, z, f))
      add_cause(out, CauseKind::NoAAAAForNS, ns, view);
  }
}

}  // namespace

std::string_view cause_id(CauseKind k) {
  switch (k) {
    case CauseKind::NoAAAAForNS: return "no-aaaa-for-ns";
    case CauseKind::MissingGlue: return "missing-glue";
    case CauseKind::InBailiwickNSWithoutAAAA: return "in-bailiwick-ns-without-aaaa";
    case CauseKind::OobNSZoneUnresolvable: return "oob-ns-zone-unresolvable";
    case CauseKind::ParentUnresolvable: return "parent-unresolvable";
  }
  return "?";
}

std::optional<CauseKind> parse_cause_id(std::string_view id) {
  for (auto k : kAllCauses)
    if (cause_id(k) == id) return k;
  return std::nullopt;
}

std::string_view to_string(View v) { return v == View::parent ? "parent" : "child"; }

std::set<CauseKind> kinds(const CauseSet& causes) {
  std::set<CauseKind> out;
  for (const auto& [k, _] : causes) out.insert(k);
  return out;
}

std::string_view to_string(ResolutionState s) {
  switch (s) {
    case ResolutionState::dual: return "dual";
    case ResolutionState::v4_only: return "v4-only";
    case ResolutionState::v6_only: return "v6-only";
    case ResolutionState::none: return "none";
  }
  return "?";
}

std::optional<ResolutionState> parse_state(std::string_view text) {
  for (auto s : {ResolutionState::dual, ResolutionState::v4_only, ResolutionState::v6_only,
                 ResolutionState::none})
    if (to_string(s) == text) return s;
  return std::nullopt;
}

ResolutionState state_of(bool v4, bool v6) {
  if (v4 && v6) return ResolutionState::dual;
  if (v4) return ResolutionState::v4_only;
  if (v6) return ResolutionState::v6_only;
  return ResolutionState::none;
}

bool ResolutionStatus::resolves(IpFamily f) const {
  if (state == ResolutionState::dual) return true;
  return f == IpFamily::v4 ? state == ResolutionState::v4_only : state == ResolutionState::v6_only;
}

EvidenceLookup dataset_lookup(const ZoneDataset& data,
                              std::function<bool(const DomainName&, IpFamily)> resolves) {
  return EvidenceLookup{[&data](const DomainName& ns) { return data.zone_of(ns); }, std::move(resolves)};
}

ViewEvaluation evaluate_views(const ZoneRecordSet& zone, const DomainName& parent,
                              const EvidenceLookup& lookup, IpFamily f) {
  ViewEvaluation ev;
  if (const auto* names = zone.ns_view(parent)) {
    for (const auto& ns : *names) {
      bool ok = ns_resolves(zone, ns, parent, lookup, f);
      ev.parent_ns[ns] = ok;
      ev.glue_res = ev.glue_res || ok;
    }
  }
  if (const auto* names = zone.ns_view(zone.zone)) {
    for (const auto& ns : *names) {
      bool ok = ns_resolves(zone, ns, zone.zone, lookup, f);
      ev.child_ns[ns] = ok;
      ev.zone_res = ev.zone_res || ok;
    }
  }
  return ev;
}

bool has_intent(const ZoneRecordSet& zone, IpFamily f) {
  for (const auto& ns : zone.all_ns())
    if (has_addr_anywhere(zone, ns, f)) return true;
  return false;
}

CauseSet diagnose(const ZoneRecordSet& zone, const DomainName& parent, const EvidenceLookup& lookup,
                  IpFamily f) {
  CauseSet out;
  auto ev = evaluate_views(zone, parent, lookup, f);
  bool parent_ok = lookup.resolves(parent, f);
  if (parent_ok && ev.glue_res && ev.zone_res) return out;

  if (!has_intent(zone, f)) {
    // Without any address of this family there is nothing deeper to diagnose.
    FailureCause c{CauseKind::NoAAAAForNS, zone.all_ns(), {}};
    if (!ev.glue_res) c.views.insert(View::parent);
    if (!ev.zone_res) c.views.insert(View::child);
    out.emplace(CauseKind::NoAAAAForNS, std::move(c));
    return out;
  }
  if (!parent_ok) add_cause(out, CauseKind::ParentUnresolvable, parent, std::nullopt);
  if (!ev.glue_res) diagnose_view(zone, zone.ns_view(parent), parent, View::parent, lookup, f, out);
  if (!ev.zone_res) diagnose_view(zone, zone.ns_view(zone.zone), zone.zone, View::child, lookup, f, out);
  return out;
}

ResolutionStatus classify(const ZoneRecordSet& zone, const std::optional<DomainName>& parent,
                          const EvidenceLookup& lookup) {
  if (!parent) throw MissingParentEvidence(zone.zone);
  ResolutionStatus st;
  st.v6_failures = diagnose(zone, *parent, lookup, IpFamily::v6);
  st.v4_failures = diagnose(zone, *parent, lookup, IpFamily::v4);
  st.state = state_of(st.v4_failures.empty(), st.v6_failures.empty());
  st.intent_v6 = has_intent(zone, IpFamily::v6);
  return st;
}

double FailureBreakdown::percent(CauseKind k) const {
  if (population == 0) return 0.0;
  auto it = counts.find(k);
  return it == counts.end() ? 0.0 : 100.0 * static_cast<double>(it->second) / static_cast<double>(population);
}

FailureBreakdown failure_breakdown(const std::vector<ResolutionStatus>& statuses) {
  FailureBreakdown b;
  for (auto k : kAllCauses) b.counts[k] = 0;
  for (const auto& st : statuses) {
    if (!st.intent_v6 || st.resolves(IpFamily::v6)) continue;
    ++b.population;
    for (const auto& [k, _] : st.v6_failures) ++b.counts[k];
  }
  return b;
}

}  // namespace v6ready
