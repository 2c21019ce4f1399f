#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "v6ready/classifier.hpp"
#include "v6ready/query.hpp"
#include "v6ready/zone_data.hpp"

namespace v6ready {

struct RootHint {
  DomainName name;
  IpAddress address;

  friend bool operator==(const RootHint&, const RootHint&) = default;
};
using RootHints = std::vector<RootHint>;

/// Lines of "name protocol address" (protocol is v4/v6, or A/AAAA); '#' comments.
RootHints parse_root_hints(const std::string& text);
RootHints load_root_hints(const std::string& path);
std::string format_root_hints(const RootHints& hints);
/// The IANA root servers.
RootHints default_root_hints();

enum class ProtocolFilter : std::uint8_t { both, v4_only, v6_only };
std::string_view to_string(ProtocolFilter p);
bool includes(ProtocolFilter p, IpFamily f);

class RootUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DepthLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServerQuery {
  IpAddress server;
  DomainName qname;
  RRType qtype;
  QueryOutcome outcome;
};

struct FamilyVerdict {
  bool parent_ok = false;  // a parent-listed NS answered for the zone
  bool child_ok = false;   // a child-listed NS answered for the zone
  bool resolved = false;   // parent_ok && child_ok (and the parent resolved)
  bool lenient = false;    // any NS from either view answered
  bool evaluated = false;

  friend bool operator==(const FamilyVerdict&, const FamilyVerdict&) = default;
};

struct DelegationStep {
  DomainName zone;
  NameSet parent_ns_set;
  std::optional<NameSet> child_ns_set;
  std::map<DomainName, AddressSet> glue;       // from the parent's referral
  std::map<DomainName, AddressSet> addresses;  // what each NS name resolved to
  std::set<IpAddress> responsive;              // servers that answered for the zone
  std::vector<ServerQuery> queried_servers;
  std::array<FamilyVerdict, 2> verdict;        // indexed by IpFamily
  std::vector<std::string> defects;            // e.g. CNAME at an NS target

  const FamilyVerdict& of(IpFamily f) const { return verdict[static_cast<std::size_t>(f)]; }
};

struct ServerEnrichment {
  IpAddress server;
  std::map<RRType, std::vector<ResourceRecord>> records;
  std::optional<std::string> version;
  std::vector<std::string> errors;
};

struct Enrichment {
  std::vector<ServerEnrichment> servers;
  std::map<IpAddress, std::string> server_version;

  /// Union over servers, de-duplicated.
  std::vector<ResourceRecord> records(RRType t) const;
};

struct ChainResult {
  DomainName target;
  DomainName zone;  // deepest zone cut enclosing the target
  std::vector<DelegationStep> steps;
  ResolutionStatus status;
  Enrichment enrichment;

  const DelegationStep* step(const DomainName& zone) const;
  bool resolves(IpFamily f) const { return status.resolves(f); }
};

struct ResolverOptions {
  ProtocolFilter filter = ProtocolFilter::both;
  int max_depth = 32;
  int max_subordinate = 16;
  bool enrich = true;
};

/// Iterative, root-anchored resolution of delegation chains, run separately
/// over IPv4 and IPv6 with only that protocol's transport and addresses. One
/// resolver memoizes zone verdicts across targets; it is not thread-safe, but
/// several resolvers may share one QueryEngine and its cache.
class ChainResolver {
 public:
  ChainResolver(QueryEngine& engine, RootHints hints, ResolverOptions opts = {});
  ~ChainResolver();

  ChainResult resolve_chain(const DomainName& target);
  /// Resolves the addresses of `host` over `f` (the host's zone must resolve over `f`).
  AddressSet resolve_host(const DomainName& host, IpFamily f);
  /// Verdict of `zone` over `f`, walking from the root if not known yet.
  bool zone_resolves(const DomainName& zone, IpFamily f);

  /// Everything observed so far, grouped by responding bailiwick.
  ZoneDataset evidence() const;
  const ResolverOptions& options() const noexcept { return opts_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  ResolverOptions opts_;
};

ChainResult resolve_chain(const DomainName& target, QueryEngine& engine, const RootHints& hints,
                          ResolverOptions opts = {});

struct LivenessResult {
  IpAddress address;
  enum class Status : std::uint8_t { responsive, unresponsive, invalid } status = Status::unresponsive;
};
std::string_view to_string(LivenessResult::Status s);

/// SOA query for `zone` at every address; "::" and multicast are rejected
/// before probing.
std::vector<LivenessResult> probe_ns_liveness(const DomainName& zone, const std::vector<IpAddress>& addresses,
                                              QueryEngine& engine);

/// NS/TXT/SOA/MX for `zone` plus CHAOS TXT version.bind at every server.
Enrichment enrich(const DomainName& zone, const std::vector<IpAddress>& servers, QueryEngine& engine);

/// Structured report (one JSON document per target).
std::string chain_report_json(const ChainResult& r, int indent = 2);
std::string chain_report_text(const ChainResult& r);

}  // namespace v6ready
