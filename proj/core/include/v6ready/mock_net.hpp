#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "v6ready/message.hpp"
#include "v6ready/passive.hpp"
#include "v6ready/query.hpp"
#include "v6ready/resolver.hpp"
#include "v6ready/socket_transport.hpp"

namespace v6ready {

enum class Defect : std::uint8_t {
  drop_aaaa_glue,      // parent's referral carries no AAAA glue for the zone's NS
  drop_aaaa_apex,      // zone publishes no AAAA for its own in-bailiwick NS names
  truncate_udp,        // every UDP answer for the zone is truncated
  formerr_on_edns,     // EDNS queries for the zone get FORMERR
  blackhole_v6,        // IPv6 queries for the zone are dropped
  blackhole_all,       // all queries for the zone are dropped
  wrong_ns_set_child,  // the zone's own NS RRset omits its last NS
};
inline constexpr std::array<Defect, 7> kAllDefects = {
    Defect::drop_aaaa_glue, Defect::drop_aaaa_apex,   Defect::truncate_udp,      Defect::formerr_on_edns,
    Defect::blackhole_v6,   Defect::blackhole_all,    Defect::wrong_ns_set_child};
std::string_view defect_id(Defect d);
std::optional<Defect> parse_defect(std::string_view id);

struct FixtureNs {
  DomainName name;
  std::vector<IpAddress> addresses;  // where the host listens; also published by its owner zone
  bool in_parent = true;
  bool in_child = true;
  std::optional<std::vector<IpAddress>> glue;  // subset served as glue; default: all
  std::string version;
  std::optional<std::uint32_t> serial;  // per-server SOA serial override
};

struct FixtureZone {
  DomainName zone;
  std::vector<FixtureNs> ns;
  std::set<Defect> defects;
  std::uint32_t serial = 1;
  std::vector<std::string> txt;
  std::vector<MxData> mx;
};

/// Extra address records, published by the deepest zone enclosing `name`.
struct FixtureHost {
  DomainName name;
  std::vector<IpAddress> addresses;
};

struct Fixture {
  std::vector<FixtureZone> zones;
  std::vector<FixtureHost> hosts;
};

class FixtureError : public std::invalid_argument {
 public:
  enum class Code { OrphanZone, AddressCollision, DuplicateZone, InvalidFixture };
  FixtureError(Code c, const std::string& what) : std::invalid_argument(what), code_(c) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

Fixture load_fixture(const std::string& path);
Fixture parse_fixture(const std::string& json_text);
std::string fixture_to_json(const Fixture& fx);

struct PacketEntry {
  std::uint64_t seq = 0;
  Millis time{0};
  IpAddress server;
  IpFamily family = IpFamily::v4;
  TransportKind transport = TransportKind::udp;
  DnsMessage query;
  std::optional<DnsMessage> response;  // unset: dropped
  std::optional<DomainName> zone;      // zone the answer came from
};
using PacketLog = std::vector<PacketEntry>;

/// In-process DNS universe. Every fixture NS is a host that listens on its
/// addresses and serves each zone that lists it; a host answers from the
/// deepest zone it serves that encloses the query name.
class Universe : public Transport {
 public:
  explicit Universe(Fixture fx, std::uint64_t seed = 1);

  Reply exchange(const IpAddress& server, TransportKind kind, std::span<const std::uint8_t> query,
                 Millis timeout) override;
  void pause(Millis d) override;

  /// Computes (and logs) the reply a server would send; nullopt when dropped.
  std::optional<std::vector<std::uint8_t>> respond(const IpAddress& server, TransportKind kind,
                                                   std::span<const std::uint8_t> query);

  RootHints root_hints() const;
  const Fixture& fixture() const noexcept { return fx_; }
  std::vector<DomainName> zones() const;
  const FixtureZone* zone(const DomainName& z) const;
  std::optional<DomainName> parent_of(const DomainName& zone) const;
  /// Deepest fixture zone enclosing `name`.
  DomainName owner_zone(const DomainName& name) const;
  /// Addresses published for `name` by its owner zone (after defects).
  AddressSet published(const DomainName& name) const;
  /// Glue the parent serves for `ns` of `zone` (after defects).
  AddressSet glue(const DomainName& zone, const DomainName& ns) const;
  NameSet parent_ns_set(const DomainName& zone) const;
  NameSet child_ns_set(const DomainName& zone) const;
  std::set<IpAddress> listening() const;
  /// Zones served by the host listening on `a`.
  std::set<DomainName> served_by(const IpAddress& a) const;

  void set_latency(const IpAddress& a, Millis rtt);
  void set_loss(const IpAddress& a, double probability);
  double loss(const IpAddress& a) const;
  /// Whether the host at `a` answers queries for `zone` at all.
  bool live_for(const IpAddress& a, const DomainName& zone) const;

  Millis now() const;
  PacketLog packets() const;
  std::size_t packet_count() const;
  void clear_log();

 private:
  struct Host {
    DomainName name;
    std::set<DomainName> zones;
    std::string version;
    std::map<DomainName, std::uint32_t> serial;
  };

  DnsMessage answer(const Host& host, const DnsMessage& q, TransportKind kind,
                    std::optional<DomainName>& zone_out, bool& drop, const IpAddress& server) const;

  Fixture fx_;
  std::map<DomainName, std::size_t> zone_index_;
  std::map<DomainName, DomainName> parent_;
  std::map<DomainName, std::set<DomainName>> children_;
  std::map<DomainName, AddressSet> book_;  // name -> addresses
  std::map<IpAddress, DomainName> host_of_;
  std::map<DomainName, Host> hosts_;
  std::map<IpAddress, Millis> latency_;
  std::map<IpAddress, double> loss_;

  mutable std::mutex mu_;
  std::mt19937_64 rng_;
  Millis clock_{0};
  PacketLog log_;
};

inline constexpr std::int64_t kExportEpoch = 1422251650;

/// Table-1 tuples from the exchange history, de-duplicated on
/// (rrname, rrtype, bailiwick, rdata) with occurrence counts.
std::vector<PassiveTuple> export_tuples(const PacketLog& log);
/// Tuples for everything the universe would serve: every referral and every
/// authoritative NS/A/AAAA RRset, without running a crawl.
std::vector<PassiveTuple> export_zone_data(const Universe& u);

struct CrawlResult {
  std::map<DomainName, ChainResult> chains;
  std::map<DomainName, std::array<bool, 2>> verdicts;  // excludes the root
};
/// Resolves every fixture zone with one resolver and a shared cache.
CrawlResult crawl_universe(Universe& u, QueryPolicy policy = {}, ProtocolFilter filter = ProtocolFilter::both,
                           std::uint64_t seed = 1);

using GroundTruth = std::map<DomainName, std::array<bool, 2>>;  // excludes the root

/// Exhaustive path enumeration over the fixture model (liveness included).
GroundTruth enumerate_ground_truth(const Universe& u);

struct DefectRates {
  double oob_ns = 0.3;         // chance an NS slot points at another zone's host
  double missing_v6 = 0.15;    // chance an in-bailiwick host has no IPv6 address
  double missing_v4 = 0.05;
  double drop_aaaa_glue = 0.0;
  double drop_aaaa_apex = 0.0;
  double truncate_udp = 0.0;
  double formerr_on_edns = 0.0;
  double blackhole_v6 = 0.0;
  double blackhole_all = 0.0;
  double wrong_ns_set_child = 0.0;

  static DefectRates none();
  /// Every static defect at `rate`; no blackholes.
  static DefectRates mixed(double rate = 0.1);
};

struct RandomUniverse {
  Fixture fixture;
  GroundTruth truth;
};

/// Seeded tree of `size` zones below the root, depth at most 4.
RandomUniverse random_universe(std::uint64_t seed, std::size_t size, const DefectRates& rates);

/// Binds every virtual address of a universe to a loopback UDP+TCP port so real
/// sockets can talk to it. The address map routes logical addresses there.
class LoopbackServer {
 public:
  explicit LoopbackServer(Universe& u, bool prefer_v6_loopback = false);
  ~LoopbackServer();
  LoopbackServer(const LoopbackServer&) = delete;
  LoopbackServer& operator=(const LoopbackServer&) = delete;

  const std::map<IpAddress, Endpoint>& address_map() const noexcept { return map_; }
  void stop();

 private:
  void serve();

  Universe& u_;
  std::map<IpAddress, Endpoint> map_;
  struct Socket {
    int udp = -1;
    int tcp = -1;
    IpAddress logical;
  };
  std::vector<Socket> sockets_;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

}  // namespace v6ready
