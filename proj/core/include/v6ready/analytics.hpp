#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "v6ready/name.hpp"
#include "v6ready/passive.hpp"

namespace v6ready {

/// Public suffix list with wildcard ("*.") and exception ("!") rules. Rules
/// below the "===BEGIN PRIVATE DOMAINS===" marker are kept and flagged.
class PublicSuffixList {
 public:
  struct Match {
    std::size_t labels = 1;  // labels in the public suffix
    bool matched = false;    // false: no rule, fell back to the rightmost label
    bool is_private = false;
  };

  static PublicSuffixList parse(const std::string& text);
  static PublicSuffixList load(const std::string& path);

  void add_rule(std::string_view rule, bool is_private = false);
  Match public_suffix(const DomainName& name) const;
  /// Public suffix plus one label; nullopt when `name` is itself a public suffix.
  std::optional<DomainName> registered_domain(const DomainName& name) const;
  std::size_t size() const noexcept { return exact_.size() + wildcard_.size() + exception_.size(); }

 private:
  std::map<DomainName, bool> exact_;  // value: private section
  std::map<DomainName, bool> wildcard_;
  std::map<DomainName, bool> exception_;
};

/// One label per line, case-insensitive, '#' comments (the IANA format).
std::set<std::string> parse_tld_list(const std::string& text);
std::set<std::string> load_tld_list(const std::string& path);

/// "rank,domain" lines, or bare domains ranked by line order.
class Toplist {
 public:
  static Toplist parse(const std::string& text);
  static Toplist load(const std::string& path);

  void add(const DomainName& domain, std::uint64_t rank);
  std::optional<std::uint64_t> rank(const DomainName& domain) const;
  std::size_t size() const noexcept { return ranks_.size(); }
  /// Entries in rank order.
  std::vector<std::pair<std::uint64_t, DomainName>> entries() const;

 private:
  std::map<DomainName, std::uint64_t> ranks_;
};

enum class HierarchyGroup : std::uint8_t { tld, second_level, below_second_level };
enum class RankTier : std::uint8_t { top1k, top1k_10k, top10k_100k, top100k_1m };
std::string_view to_string(HierarchyGroup g);
std::string_view to_string(RankTier t);
std::optional<RankTier> rank_tier(std::uint64_t rank);

struct DomainGroup {
  HierarchyGroup level = HierarchyGroup::tld;
  std::optional<RankTier> tier;
  std::optional<DomainName> registered;
  bool unknown_suffix = false;  // no PSL rule matched
  bool private_suffix = false;  // matched a private-section rule

  /// The group labels this domain counts under, e.g. {"sld", "top1k"}.
  std::vector<std::string> labels() const;
};

/// Public suffixes themselves (e.g. "co.uk") are registry zones and count as TLD.
DomainGroup group_domain(const DomainName& name, const PublicSuffixList& psl, const std::set<std::string>& tlds,
                         const Toplist* toplist = nullptr);

/// "regex replacement" lines; a regex matching a whole PSL aggregate maps it to
/// the replacement operator label.
class OperatorRules {
 public:
  static OperatorRules parse(const std::string& text);
  static OperatorRules load(const std::string& path);

  void add(const std::string& pattern, std::string replacement);
  std::string collapse(const std::string& aggregate) const;
  std::size_t size() const noexcept { return rules_.size(); }

 private:
  std::vector<std::pair<std::regex, std::string>> rules_;
};

using NsSetKey = std::set<std::string>;
std::string to_string(const NsSetKey& key);
NsSetKey ns_set_key(const NameSet& ns, const PublicSuffixList& psl, const OperatorRules& rules);

struct NsSetShare {
  NsSetKey key;
  std::size_t zones = 0;
};

struct CdfPoint {
  double set_fraction = 0.0;   // top k sets over all sets
  double zone_fraction = 0.0;  // zones hosted by those sets
};

struct NsSetCdf {
  std::size_t total_zones = 0;
  std::vector<NsSetShare> sets;  // descending by zones, ties by key
  std::vector<CdfPoint> points;  // one per set
  double top10_share = 0.0;      // zones on the ten largest sets
  double top10pct_share = 0.0;   // zones on the largest ceil(10%) of sets
};

/// Distribution of non-IPv6-resolvable zones (known parent only) over NS sets.
NsSetCdf nsset_cdf(const std::vector<ZoneVerdict>& verdicts, const PublicSuffixList& psl,
                   const OperatorRules& rules);

/// Verdicts partitioned by group label; "all" holds every verdict.
std::map<std::string, std::vector<ZoneVerdict>> group_verdicts(const std::vector<ZoneVerdict>& verdicts,
                                                               const PublicSuffixList& psl,
                                                               const std::set<std::string>& tlds,
                                                               const Toplist* toplist = nullptr);

void write_states_csv(std::ostream& out, const std::string& month,
                      const std::map<std::string, SnapshotStats>& by_group);
void write_causes_csv(std::ostream& out, const std::string& month,
                      const std::map<std::string, SnapshotStats>& by_group);
void write_nsset_cdf_csv(std::ostream& out, const std::string& month, const std::map<std::string, NsSetCdf>& by_group);

}  // namespace v6ready
