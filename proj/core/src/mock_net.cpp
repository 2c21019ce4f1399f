#include "v6ready/mock_net.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace v6ready {

namespace {

constexpr std::size_t idx(IpFamily f) { return static_cast<std::size_t>(f); }
constexpr Millis kDefaultRtt{10};

Fixture default_root() {
  FixtureZone root;
  root.zone = DomainName::root();
  for (const char* n : {"a", "b"}) {
    FixtureNs ns;
    ns.name = DomainName::parse(std::string(n) + ".root");
    std::string k = n[0] == 'a' ? "1" : "2";
    ns.addresses = {*IpAddress::parse("10.0.0." + k), *IpAddress::parse("fd00::" + k)};
    root.ns.push_back(std::move(ns));
  }
  return Fixture{{root}, {}};
}

void add_addresses(std::vector<ResourceRecord>& out, const DomainName& owner, const AddressSet& addrs,
                   std::optional<RRType> only = std::nullopt) {
  for (const auto& a : addrs)
    if (!only || address_type(a.family()) == *only) out.push_back(ResourceRecord::address(owner, a));
}

}  // namespace

std::string_view defect_id(Defect d) {
  switch (d) {
    case Defect::drop_aaaa_glue: return "drop-aaaa-glue";
    case Defect::drop_aaaa_apex: return "drop-aaaa-apex";
    case Defect::truncate_udp: return "truncate-udp";
    case Defect::formerr_on_edns: return "formerr-on-edns";
    case Defect::blackhole_v6: return "blackhole-v6";
    case Defect::blackhole_all: return "blackhole-all";
    case Defect::wrong_ns_set_child: return "wrong-ns-set-child";
  }
  return "?";
}

std::optional<Defect> parse_defect(std::string_view id) {
  for (auto d : kAllDefects)
    if (defect_id(d) == id) return d;
  return std::nullopt;
}

Universe::Universe(Fixture fx, std::uint64_t seed) : fx_(std::move(fx)), rng_(seed) {
  if (fx_.zones.empty()) {
    auto hosts = std::move(fx_.hosts);
    fx_ = default_root();
    fx_.hosts = std::move(hosts);
  }
  for (std::size_t i = 0; i < fx_.zones.size(); ++i) {
    const auto& z = fx_.zones[i];
    if (!zone_index_.emplace(z.zone, i).second)
      throw FixtureError(FixtureError::Code::DuplicateZone, "zone listed twice: " + z.zone.to_string());
    if (z.ns.empty())
      throw FixtureError(FixtureError::Code::InvalidFixture, "zone without NS: " + z.zone.to_string());
    if (z.defects.count(Defect::wrong_ns_set_child) && z.ns.size() < 2)
      throw FixtureError(FixtureError::Code::InvalidFixture,
                         "wrong-ns-set-child needs at least two NS: " + z.zone.to_string());
  }
  if (!zone_index_.count(DomainName::root()))
    throw FixtureError(FixtureError::Code::OrphanZone, "fixture has no root zone");
  for (const auto& z : fx_.zones) {
    if (z.zone.is_root()) continue;
    DomainName p = z.zone.parent();
    while (!zone_index_.count(p)) p = p.parent();
    parent_[z.zone] = p;
    children_[p].insert(z.zone);
  }

  for (const auto& z : fx_.zones) {
    for (const auto& ns : z.ns) {
      book_[ns.name].insert(ns.addresses.begin(), ns.addresses.end());
      auto& h = hosts_[ns.name];
      h.name = ns.name;
      h.zones.insert(z.zone);
      if (!ns.version.empty()) h.version = ns.version;
      if (ns.serial) h.serial[z.zone] = *ns.serial;
    }
  }
  for (const auto& h : fx_.hosts) book_[h.name].insert(h.addresses.begin(), h.addresses.end());

  // Hosts listen only on the addresses their NS entries carry; extra host
  // records for the same name are published but not answered on.
  std::map<DomainName, AddressSet> listen;
  for (const auto& z : fx_.zones)
    for (const auto& ns : z.ns) listen[ns.name].insert(ns.addresses.begin(), ns.addresses.end());
  for (const auto& [name, addrs] : listen) {
    for (const auto& a : addrs) {
      auto [it, fresh] = host_of_.emplace(a, name);
      if (!fresh && it->second != name)
        throw FixtureError(FixtureError::Code::AddressCollision,
                           a.to_string() + " claimed by " + it->second.to_string() + " and " + name.to_string());
    }
  }
}

std::vector<DomainName> Universe::zones() const {
  std::vector<DomainName> out;
  for (const auto& [z, _] : zone_index_) out.push_back(z);
  return out;
}

const FixtureZone* Universe::zone(const DomainName& z) const {
  auto it = zone_index_.find(z);
  return it == zone_index_.end() ? nullptr : &fx_.zones[it->second];
}

std::optional<DomainName> Universe::parent_of(const DomainName& z) const {
  auto it = parent_.find(z);
  if (it == parent_.end()) return std::nullopt;
  return it->second;
}

DomainName Universe::owner_zone(const DomainName& name) const {
  for (std::size_t n = name.label_count(); n > 0; --n) {
    auto s = name.suffix(n);
    if (zone_index_.count(s)) return s;
  }
  return DomainName::root();
}

AddressSet Universe::published(const DomainName& name) const {
  auto it = book_.find(name);
  if (it == book_.end()) return {};
  AddressSet out = it->second;
  const auto* z = zone(owner_zone(name));
  if (z && z->defects.count(Defect::drop_aaaa_apex)) {
    bool own_ns = std::any_of(z->ns.begin(), z->ns.end(), [&](const FixtureNs& n) { return n.name == name; });
    if (own_ns && is_in_bailiwick(name, z->zone))
      for (auto a = out.begin(); a != out.end();) a = a->family() == IpFamily::v6 ? out.erase(a) : std::next(a);
  }
  return out;
}

AddressSet Universe::glue(const DomainName& zone_name, const DomainName& ns) const {
  const auto* z = zone(zone_name);
  if (!z || !is_in_bailiwick(ns, zone_name)) return {};
  AddressSet out;
  for (const auto& n : z->ns) {
    if (n.name != ns || !n.in_parent) continue;
    if (n.glue) {
      out.insert(n.glue->begin(), n.glue->end());
    } else if (auto it = book_.find(ns); it != book_.end()) {
      out.insert(it->second.begin(), it->second.end());
    }
  }
  if (z->defects.count(Defect::drop_aaaa_glue))
    for (auto a = out.begin(); a != out.end();) a = a->family() == IpFamily::v6 ? out.erase(a) : std::next(a);
  return out;
}

NameSet Universe::parent_ns_set(const DomainName& zone_name) const {
  NameSet out;
  if (const auto* z = zone(zone_name))
    for (const auto& n : z->ns)
      if (n.in_parent) out.insert(n.name);
  return out;
}

NameSet Universe::child_ns_set(const DomainName& zone_name) const {
  NameSet out;
  const auto* z = zone(zone_name);
  if (!z) return out;
  std::vector<DomainName> names;
  for (const auto& n : z->ns)
    if (n.in_child) names.push_back(n.name);
  if (z->defects.count(Defect::wrong_ns_set_child) && !names.empty()) names.pop_back();
  out.insert(names.begin(), names.end());
  return out;
}

std::set<IpAddress> Universe::listening() const {
  std::set<IpAddress> out;
  for (const auto& [a, _] : host_of_) out.insert(a);
  return out;
}

std::set<DomainName> Universe::served_by(const IpAddress& a) const {
  auto it = host_of_.find(a);
  if (it == host_of_.end()) return {};
  return hosts_.at(it->second).zones;
}

void Universe::set_latency(const IpAddress& a, Millis rtt) {
  std::lock_guard lock(mu_);
  latency_[a] = rtt;
}

void Universe::set_loss(const IpAddress& a, double probability) {
  std::lock_guard lock(mu_);
  loss_[a] = probability;
}

double Universe::loss(const IpAddress& a) const {
  std::lock_guard lock(mu_);
  auto it = loss_.find(a);
  return it == loss_.end() ? 0.0 : it->second;
}

bool Universe::live_for(const IpAddress& a, const DomainName& zone_name) const {
  if (!a.is_usable() || loss(a) >= 1.0) return false;
  auto served = served_by(a);
  if (!served.count(zone_name)) return false;
  const auto* z = zone(zone_name);
  if (z->defects.count(Defect::blackhole_all)) return false;
  if (z->defects.count(Defect::blackhole_v6) && a.family() == IpFamily::v6) return false;
  return true;
}

RootHints Universe::root_hints() const {
  RootHints out;
  for (const auto& n : zone(DomainName::root())->ns) {
    auto it = book_.find(n.name);
    if (it == book_.end()) continue;
    for (const auto& a : it->second) out.push_back({n.name, a});
  }
  return out;
}

DnsMessage Universe::answer(const Host& host, const DnsMessage& q, TransportKind kind,
                            std::optional<DomainName>& zone_out, bool& drop, const IpAddress& server) const {
  DnsMessage r = DnsMessage::make_response(q);
  if (!q.question) {
    r.rcode = Rcode::FormErr;
    return r;
  }
  if (q.opcode != 0) {
    r.rcode = Rcode::NotImp;
    return r;
  }
  const auto& qn = q.question->name;
  const auto qt = q.question->type;

  if (q.question->rrclass == rrclass::CH) {
    static const DomainName version_bind = DomainName::parse("version.bind");
    if (qn == version_bind && qt == rrtype::TXT && !host.version.empty()) {
      r.aa = true;
      r.answer.push_back(make_txt(qn, {host.version}, 0, rrclass::CH));
    } else {
      r.rcode = Rcode::Refused;
    }
    return r;
  }
  if (q.question->rrclass != rrclass::IN) {
    r.rcode = Rcode::Refused;
    return r;
  }

  const FixtureZone* z = nullptr;
  for (const auto& name : host.zones)
    if (is_in_bailiwick(qn, name) && (!z || name.label_count() > z->zone.label_count())) z = zone(name);
  if (!z) {
    r.rcode = Rcode::Refused;
    return r;
  }
  zone_out = z->zone;
  if (z->defects.count(Defect::blackhole_all) ||
      (z->defects.count(Defect::blackhole_v6) && server.family() == IpFamily::v6)) {
    drop = true;
    return r;
  }
  if (z->defects.count(Defect::formerr_on_edns) && q.edns) {
    r.rcode = Rcode::FormErr;
    r.edns.reset();
    return r;
  }

  std::optional<DomainName> cut;
  if (auto it = children_.find(z->zone); it != children_.end())
    for (const auto& c : it->second)
      if (is_in_bailiwick(qn, c)) cut = c;

  if (cut) {
    for (const auto& ns : parent_ns_set(*cut)) {
      r.authority.push_back(ResourceRecord::ns(*cut, ns));
      add_addresses(r.additional, ns, glue(*cut, ns));
    }
  } else {
    r.aa = true;
    std::vector<ResourceRecord> rrs;
    const bool apex = qn == z->zone;
    if (apex && qt == rrtype::NS)
      for (const auto& ns : child_ns_set(z->zone)) rrs.push_back(ResourceRecord::ns(qn, ns));
    if (apex && qt == rrtype::TXT && !z->txt.empty()) rrs.push_back(make_txt(qn, z->txt));
    if (apex && qt == rrtype::MX)
      for (const auto& mx : z->mx) rrs.push_back(make_mx(qn, mx));
    auto soa = [&] {
      SoaData s;
      s.mname = z->ns.front().name;
      s.rname = z->zone.child("hostmaster");
      s.serial = z->serial;
      if (auto it = host.serial.find(z->zone); it != host.serial.end()) s.serial = it->second;
      return make_soa(z->zone, s);
    };
    if (apex && qt == rrtype::SOA) rrs.push_back(soa());
    AddressSet addrs = published(qn);
    if (qt == rrtype::A || qt == rrtype::AAAA) add_addresses(rrs, qn, addrs, qt);

    if (!rrs.empty()) {
      r.answer = std::move(rrs);
    } else {
      bool exists = apex || !addrs.empty();
      if (!exists) {
        for (auto it = book_.upper_bound(qn); it != book_.end() && !exists; ++it) {
          if (!it->first.is_subdomain_of(qn)) continue;
          exists = !it->second.empty() && owner_zone(it->first) == z->zone;
        }
        if (auto it = children_.find(z->zone); it != children_.end())
          for (const auto& c : it->second)
            if (c.is_subdomain_of(qn)) exists = true;
        for (const auto& h : fx_.hosts)
          if (h.name.is_subdomain_of(qn) && owner_zone(h.name) == z->zone) exists = true;
      }
      r.rcode = exists ? Rcode::NoError : Rcode::NXDomain;
      r.authority.push_back(soa());
    }
  }

  if (kind == TransportKind::udp) {
    std::size_t limit = q.edns ? std::min<std::size_t>(q.edns->udp_payload_size, 4096) : 512;
    if (z->defects.count(Defect::truncate_udp) || encode(r).size() > limit) {
      r.tc = true;
      r.answer.clear();
      r.authority.clear();
      r.additional.clear();
    }
  }
  return r;
}

std::optional<std::vector<std::uint8_t>> Universe::respond(const IpAddress& server, TransportKind kind,
                                                           std::span<const std::uint8_t> query) {
  DnsMessage q;
  try {
    q = decode(query);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  std::lock_guard lock(mu_);
  PacketEntry e;
  e.seq = log_.size();
  e.time = clock_;
  e.server = server;
  e.family = server.family();
  e.transport = kind;
  e.query = q;

  std::optional<std::vector<std::uint8_t>> out;
  auto hit = host_of_.find(server);
  double p = 0.0;
  if (auto it = loss_.find(server); it != loss_.end()) p = it->second;
  bool lost = p >= 1.0 || (p > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p);
  if (hit != host_of_.end() && !lost && !q.qr) {
    bool drop = false;
    std::optional<DomainName> zone_out;
    DnsMessage r = answer(hosts_.at(hit->second), q, kind, zone_out, drop, server);
    e.zone = zone_out;
    if (!drop) {
      out = encode(r);
      e.response = std::move(r);
    }
  }
  log_.push_back(std::move(e));
  return out;
}

Transport::Reply Universe::exchange(const IpAddress& server, TransportKind kind,
                                    std::span<const std::uint8_t> query, Millis timeout) {
  Reply reply;
  auto out = respond(server, kind, query);
  std::lock_guard lock(mu_);
  if (out) {
    auto it = latency_.find(server);
    clock_ += it == latency_.end() ? kDefaultRtt : it->second;
    reply.status = Reply::Status::ok;
    reply.payload = std::move(*out);
  } else {
    clock_ += timeout;
    reply.status = Reply::Status::timeout;
  }
  return reply;
}

void Universe::pause(Millis d) {
  std::lock_guard lock(mu_);
  clock_ += d;
}

Millis Universe::now() const {
  std::lock_guard lock(mu_);
  return clock_;
}

PacketLog Universe::packets() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t Universe::packet_count() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

void Universe::clear_log() {
  std::lock_guard lock(mu_);
  log_.clear();
}

namespace {

using TupleKey = std::tuple<DomainName, RRType, DomainName, std::vector<std::string>>;

struct TupleAcc {
  std::uint64_t count = 0;
  std::int64_t first = std::numeric_limits<std::int64_t>::max();
  std::int64_t last = std::numeric_limits<std::int64_t>::min();
};

void accumulate(std::map<TupleKey, TupleAcc>& acc, const DomainName& owner, RRType type,
                const DomainName& bailiwick, std::vector<std::string> rdata, std::int64_t t,
                std::uint64_t n = 1) {
  if (rdata.empty()) return;
  std::sort(rdata.begin(), rdata.end());
  rdata.erase(std::unique(rdata.begin(), rdata.end()), rdata.end());
  auto& a = acc[{owner, type, bailiwick, std::move(rdata)}];
  a.count += n;
  a.first = std::min(a.first, t);
  a.last = std::max(a.last, t);
}

std::vector<PassiveTuple> flatten(const std::map<TupleKey, TupleAcc>& acc) {
  std::vector<PassiveTuple> out;
  for (const auto& [k, a] : acc) {
    PassiveTuple t;
    t.count = a.count;
    t.time_first = a.first;
    t.time_last = a.last;
    t.rrname = std::get<0>(k);
    t.rrtype = std::get<1>(k);
    t.bailiwick = std::get<2>(k);
    t.rdata = std::get<3>(k);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::vector<PassiveTuple> export_tuples(const PacketLog& log) {
  std::map<TupleKey, TupleAcc> acc;
  for (const auto& e : log) {
    if (!e.response || !e.zone || e.response->rcode != Rcode::NoError) continue;
    if (!e.query.question || e.query.question->rrclass != rrclass::IN) continue;
    std::map<std::pair<DomainName, RRType>, std::vector<std::string>> rrsets;
    for (const auto* section : {&e.response->answer, &e.response->authority, &e.response->additional})
      for (const auto& rr : *section) rrsets[{rr.owner, rr.type}].push_back(rr.rdata_text());
    std::int64_t t = kExportEpoch + e.time.count() / 1000;
    for (auto& [key, rdata] : rrsets) accumulate(acc, key.first, key.second, *e.zone, std::move(rdata), t);
  }
  return flatten(acc);
}

std::vector<PassiveTuple> export_zone_data(const Universe& u) {
  std::map<TupleKey, TupleAcc> acc;
  auto texts = [](const AddressSet& s, IpFamily f) {
    std::vector<std::string> out;
    for (const auto& a : s)
      if (a.family() == f) out.push_back(a.to_string());
    return out;
  };
  auto names = [](const NameSet& s) {
    std::vector<std::string> out;
    for (const auto& n : s) out.push_back(n.to_fqdn());
    return out;
  };
  for (const auto& z : u.zones()) {
    if (auto p = u.parent_of(z)) {
      auto pset = u.parent_ns_set(z);
      accumulate(acc, z, rrtype::NS, *p, names(pset), kExportEpoch);
      for (const auto& ns : pset)
        for (auto f : {IpFamily::v4, IpFamily::v6})
          accumulate(acc, ns, address_type(f), *p, texts(u.glue(z, ns), f), kExportEpoch);
    }
    auto cset = u.child_ns_set(z);
    accumulate(acc, z, rrtype::NS, z, names(cset), kExportEpoch);
  }
  // Every name with addresses, published by its owner zone.
  NameSet all;
  for (const auto& z : u.fixture().zones)
    for (const auto& ns : z.ns) all.insert(ns.name);
  for (const auto& h : u.fixture().hosts) all.insert(h.name);
  for (const auto& n : all) {
    auto pub = u.published(n);
    for (auto f : {IpFamily::v4, IpFamily::v6})
      accumulate(acc, n, address_type(f), u.owner_zone(n), texts(pub, f), kExportEpoch);
  }
  return flatten(acc);
}

CrawlResult crawl_universe(Universe& u, QueryPolicy policy, ProtocolFilter filter, std::uint64_t seed) {
  ResponseCache cache;
  QueryEngine engine(u, policy, &cache, seed);
  ResolverOptions opts;
  opts.filter = filter;
  opts.enrich = false;
  ChainResolver resolver(engine, u.root_hints(), opts);
  CrawlResult out;
  for (const auto& z : u.zones()) {
    if (z.is_root()) continue;
    try {
      out.chains.emplace(z, resolver.resolve_chain(z));
    } catch (const RootUnreachable&) {
    }
    std::array<bool, 2> v{false, false};
    for (auto f : {IpFamily::v4, IpFamily::v6})
      if (includes(filter, f)) v[idx(f)] = resolver.zone_resolves(z, f);
    out.verdicts[z] = v;
  }
  return out;
}

namespace {

// Depth-first enumeration of delegation paths over the fixture model. Positive
// answers and negatives not cut short by an in-progress zone are memoized.
class PathEnumerator {
 public:
  explicit PathEnumerator(const Universe& u) : u_(u) {}

  bool resolves(const DomainName& zone, IpFamily f) {
    std::size_t low = kNone;
    return visit(zone, f, low);
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  bool reachable(const DomainName& zone, const AddressSet& addrs, IpFamily f) const {
    for (const auto& a : addrs)
      if (a.family() == f && u_.live_for(a, zone)) return true;
    return false;
  }

  bool ns_path(const DomainName& zone, const DomainName& ns, bool parent_view, IpFamily f, std::size_t& low) {
    if (is_in_bailiwick(ns, zone))
      return reachable(zone, parent_view ? u_.glue(zone, ns) : u_.published(ns), f);
    if (!reachable(zone, u_.published(ns), f)) return false;
    return visit(u_.owner_zone(ns), f, low);
  }

  bool visit(const DomainName& zone, IpFamily f, std::size_t& low) {
    auto key = std::make_pair(zone, f);
    if (auto it = done_.find(key); it != done_.end()) return it->second;
    if (auto it = stack_.find(key); it != stack_.end()) {
      low = std::min(low, it->second);
      return false;
    }
    const std::size_t me = depth_++;
    stack_[key] = me;
    std::size_t my_low = kNone;

    bool ok;
    if (zone.is_root()) {
      ok = false;
      for (const auto& ns : u_.parent_ns_set(zone))
        if (reachable(zone, u_.published(ns), f)) ok = true;
    } else {
      auto parent = *u_.parent_of(zone);
      ok = visit(parent, f, my_low);
      if (ok) {
        bool via_parent = false;
        for (const auto& ns : u_.parent_ns_set(zone))
          if (!via_parent && ns_path(zone, ns, true, f, my_low)) via_parent = true;
        bool via_child = false;
        for (const auto& ns : u_.child_ns_set(zone))
          if (!via_child && ns_path(zone, ns, false, f, my_low)) via_child = true;
        ok = via_parent && via_child;
      }
    }

    --depth_;
    stack_.erase(key);
    if (ok || my_low >= me)
      done_[key] = ok;
    else
      low = std::min(low, my_low);
    return ok;
  }

  const Universe& u_;
  std::map<std::pair<DomainName, IpFamily>, bool> done_;
  std::map<std::pair<DomainName, IpFamily>, std::size_t> stack_;
  std::size_t depth_ = 0;
};

}  // namespace

GroundTruth enumerate_ground_truth(const Universe& u) {
  PathEnumerator e(u);
  GroundTruth out;
  for (const auto& z : u.zones()) {
    if (z.is_root()) continue;
    out[z] = {e.resolves(z, IpFamily::v4), e.resolves(z, IpFamily::v6)};
  }
  return out;
}

}  // namespace v6ready
