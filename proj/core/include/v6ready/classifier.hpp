#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "v6ready/zone_data.hpp"

namespace v6ready {

enum class CauseKind : std::uint8_t {
  NoAAAAForNS,
  MissingGlue,
  InBailiwickNSWithoutAAAA,
  OobNSZoneUnresolvable,
  ParentUnresolvable,
};
inline constexpr std::array<CauseKind, 5> kAllCauses = {
    CauseKind::NoAAAAForNS, CauseKind::MissingGlue, CauseKind::InBailiwickNSWithoutAAAA,
    CauseKind::OobNSZoneUnresolvable, CauseKind::ParentUnresolvable};

/// Stable report identifiers: no-aaaa-for-ns, missing-glue, ...
std::string_view cause_id(CauseKind k);
std::optional<CauseKind> parse_cause_id(std::string_view id);

/// Which NS set produced a cause: the one served by the parent, or by the zone itself.
enum class View : std::uint8_t { parent, child };
std::string_view to_string(View v);

struct FailureCause {
  CauseKind kind;
  NameSet witnesses;     // NS names (or the parent zone for ParentUnresolvable)
  std::set<View> views;  // empty for ParentUnresolvable

  friend bool operator==(const FailureCause&, const FailureCause&) = default;
};
using CauseSet = std::map<CauseKind, FailureCause>;

std::set<CauseKind> kinds(const CauseSet& causes);

enum class ResolutionState : std::uint8_t { dual, v4_only, v6_only, none };
std::string_view to_string(ResolutionState s);
std::optional<ResolutionState> parse_state(std::string_view text);
ResolutionState state_of(bool v4, bool v6);

struct ResolutionStatus {
  ResolutionState state = ResolutionState::none;
  CauseSet v6_failures;
  /// Mirror-image diagnosis; only filled when v4 fails.
  CauseSet v4_failures;
  bool intent_v6 = false;

  bool resolves(IpFamily f) const;
};

class MissingParentEvidence : public std::runtime_error {
 public:
  explicit MissingParentEvidence(const DomainName& zone)
      : std::runtime_error("parent of " + zone.to_string() + " was never observed"), zone_(zone) {}
  const DomainName& zone() const noexcept { return zone_; }

 private:
  DomainName zone_;
};

/// What the classifier needs to know about the rest of the graph.
struct EvidenceLookup {
  /// Zone whose bailiwick should hold the addresses of an out-of-bailiwick NS.
  std::function<DomainName(const DomainName& ns)> zone_of;
  /// Current resolvability of a zone over a protocol. Called with the root too.
  std::function<bool(const DomainName& zone, IpFamily f)> resolves;
};

/// Lookup backed by a dataset's zone index and a resolvability callback.
EvidenceLookup dataset_lookup(const ZoneDataset& data,
                              std::function<bool(const DomainName&, IpFamily)> resolves);

struct ViewEvaluation {
  bool glue_res = false;  // some parent-listed NS resolves
  bool zone_res = false;  // some child-listed NS resolves
  std::map<DomainName, bool> parent_ns;
  std::map<DomainName, bool> child_ns;
};

/// Evaluates both NS views of `zone` over one protocol. An in-bailiwick NS needs
/// an address under the view's bailiwick; an out-of-bailiwick NS needs its zone
/// to resolve and an address under that zone's bailiwick.
ViewEvaluation evaluate_views(const ZoneRecordSet& zone, const DomainName& parent,
                              const EvidenceLookup& lookup, IpFamily f);

/// Any NS in either view has an address of family `f` under any bailiwick.
bool has_intent(const ZoneRecordSet& zone, IpFamily f);

/// Causes for failing over `f`. Empty if both views resolve and the parent resolves.
CauseSet diagnose(const ZoneRecordSet& zone, const DomainName& parent, const EvidenceLookup& lookup,
                  IpFamily f);

/// Throws MissingParentEvidence when `parent` is unset.
ResolutionStatus classify(const ZoneRecordSet& zone, const std::optional<DomainName>& parent,
                          const EvidenceLookup& lookup);

struct FailureBreakdown {
  std::size_t population = 0;  // intent_v6 and not v6-resolvable
  std::map<CauseKind, std::size_t> counts;

  double percent(CauseKind k) const;
};

FailureBreakdown failure_breakdown(const std::vector<ResolutionStatus>& statuses);

}  // namespace v6ready
