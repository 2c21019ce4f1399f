#include "v6ready/resolver.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

namespace v6ready {

namespace {

constexpr std::size_t idx(IpFamily f) { return static_cast<std::size_t>(f); }
constexpr std::size_t kNoCut = std::numeric_limits<std::size_t>::max();

const char* kIanaRoots[][3] = {
    {"a.root-servers.net", "198.41.0.4", "2001:503:ba3e::2:30"},
    {"b.root-servers.net", "170.247.170.2", "2801:1b8:10::b"},
    {"c.root-servers.net", "192.33.4.12", "2001:500:2::c"},
    {"d.root-servers.net", "199.7.91.13", "2001:500:2d::d"},
    {"e.root-servers.net", "192.203.230.10", "2001:500:a8::e"},
    {"f.root-servers.net", "192.5.5.241", "2001:500:2f::f"},
    {"g.root-servers.net", "192.112.36.4", "2001:500:12::d0d"},
    {"h.root-servers.net", "198.97.190.53", "2001:500:1::53"},
    {"i.root-servers.net", "192.36.148.17", "2001:7fe::53"},
    {"j.root-servers.net", "192.58.128.30", "2001:503:c27::2:30"},
    {"k.root-servers.net", "193.0.14.129", "2001:7fd::1"},
    {"l.root-servers.net", "199.7.83.42", "2001:500:9f::42"},
    {"m.root-servers.net", "202.12.27.33", "2001:dc3::35"},
};

bool is_referral_for(const DnsMessage& m, const DomainName& zone) {
  if (m.aa || m.rcode != Rcode::NoError) return false;
  for (const auto& rr : m.authority)
    if (rr.type == rrtype::NS && rr.owner == zone) return true;
  return false;
}

bool is_authoritative_ns(const DnsMessage& m, const DomainName& zone) {
  if (!m.aa || m.rcode != Rcode::NoError) return false;
  for (const auto& rr : m.answer)
    if (rr.type == rrtype::NS && rr.owner == zone) return true;
  return false;
}

}  // namespace

RootHints parse_root_hints(const std::string& text) {
  RootHints out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string name, proto, addr;
    if (!(ls >> name)) continue;
    if (!(ls >> proto >> addr))
      throw std::invalid_argument("root hints line " + std::to_string(lineno) + ": expected name protocol address");
    auto a = IpAddress::parse(addr);
    if (!a) throw std::invalid_argument("root hints line " + std::to_string(lineno) + ": bad address " + addr);
    std::optional<IpFamily> fam = parse_family(proto);
    if (!fam) {
      if (proto == "A" || proto == "a") fam = IpFamily::v4;
      else if (proto == "AAAA" || proto == "aaaa") fam = IpFamily::v6;
    }
    if (!fam || *fam != a->family())
      throw std::invalid_argument("root hints line " + std::to_string(lineno) + ": protocol does not match address");
    out.push_back({DomainName::parse(name), *a});
  }
  return out;
}

RootHints load_root_hints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open root hints " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_root_hints(ss.str());
}

std::string format_root_hints(const RootHints& hints) {
  std::string out;
  for (const auto& h : hints)
    out += h.name.to_fqdn() + ' ' + std::string(to_string(h.address.family())) + ' ' +
           h.address.to_string() + '\n';
  return out;
}

RootHints default_root_hints() {
  RootHints out;
  for (const auto& r : kIanaRoots) {
    auto name = DomainName::parse(r[0]);
    out.push_back({name, *IpAddress::parse(r[1])});
    out.push_back({name, *IpAddress::parse(r[2])});
  }
  return out;
}

std::string_view to_string(ProtocolFilter p) {
  switch (p) {
    case ProtocolFilter::both: return "both";
    case ProtocolFilter::v4_only: return "v4-only";
    case ProtocolFilter::v6_only: return "v6-only";
  }
  return "?";
}

bool includes(ProtocolFilter p, IpFamily f) {
  return p == ProtocolFilter::both || (p == ProtocolFilter::v4_only) == (f == IpFamily::v4);
}

std::string_view to_string(LivenessResult::Status s) {
  switch (s) {
    case LivenessResult::Status::responsive: return "responsive";
    case LivenessResult::Status::unresponsive: return "unresponsive";
    case LivenessResult::Status::invalid: return "invalid";
  }
  return "?";
}

std::vector<ResourceRecord> Enrichment::records(RRType t) const {
  std::vector<ResourceRecord> out;
  for (const auto& s : servers) {
    auto it = s.records.find(t);
    if (it == s.records.end()) continue;
    for (const auto& rr : it->second)
      if (std::find(out.begin(), out.end(), rr) == out.end()) out.push_back(rr);
  }
  return out;
}

const DelegationStep* ChainResult::step(const DomainName& z) const {
  for (const auto& s : steps)
    if (s.zone == z) return &s;
  return nullptr;
}

struct ChainResolver::Impl {
  struct Eval {
    bool resolved = false;
    std::vector<IpAddress> servers;  // responsive, this family only
  };

  struct ZoneRecord {
    DelegationStep step;
    std::optional<DomainName> parent;
    std::set<std::tuple<IpAddress, DomainName, RRType>> logged;
  };

  Impl(QueryEngine& e, RootHints h, ResolverOptions o) : engine(e), hints(std::move(h)), opts(o) {}

  QueryEngine& engine;
  RootHints hints;
  ResolverOptions opts;
  std::map<DomainName, ZoneRecord> zones;
  std::map<std::pair<DomainName, IpFamily>, Eval> memo;
  std::map<std::pair<DomainName, IpFamily>, std::size_t> in_progress;
  std::size_t stack_depth = 0;
  int subordinate = 0;
  ZoneDataset data;

  ZoneRecord& record(const DomainName& zone) {
    auto& r = zones[zone];
    r.step.zone = zone;
    return r;
  }

  QueryOutcome ask(const DomainName& context, const IpAddress& server, const DomainName& qname,
                   RRType qtype, RRClass qclass = rrclass::IN) {
    auto out = engine.query(server, qname, qtype, qclass);
    auto& rec = record(context);
    if (rec.logged.insert({server, qname, qtype}).second)
      rec.step.queried_servers.push_back({server, qname, qtype, out});
    return out;
  }

  // Stores referral NS and glue seen from `parent` for `zone`.
  void absorb_referral(const DomainName& parent, const DomainName& zone, const DnsMessage& m) {
    auto& rec = record(zone);
    rec.parent = parent;
    for (const auto& rr : m.authority) {
      if (rr.type != rrtype::NS || rr.owner != zone || !rr.target()) continue;
      rec.step.parent_ns_set.insert(*rr.target());
      data.add_ns(zone, parent, *rr.target());
    }
    for (const auto& rr : m.additional) {
      const auto* a = rr.address();
      if (!a || !rec.step.parent_ns_set.count(rr.owner)) continue;
      if (!is_in_bailiwick(rr.owner, zone)) continue;
      rec.step.glue[rr.owner].insert(*a);
      data.add_address(rr.owner, parent, *a);
    }
  }

  void absorb_child_ns(const DomainName& zone, const DnsMessage& m) {
    auto& rec = record(zone);
    if (!rec.step.child_ns_set) rec.step.child_ns_set.emplace();
    for (const auto& rr : m.answer) {
      if (rr.type != rrtype::NS || rr.owner != zone || !rr.target()) continue;
      rec.step.child_ns_set->insert(*rr.target());
      data.add_ns(zone, zone, *rr.target());
    }
  }

  // A and AAAA for `name` at `servers` of `zone`; returns every address seen.
  AddressSet query_addresses(const DomainName& zone, const DomainName& name,
                             const std::vector<IpAddress>& servers) {
    AddressSet out;
    for (const auto& s : servers) {
      for (auto t : {rrtype::A, rrtype::AAAA}) {
        auto o = ask(zone, s, name, t);
        if (!o.ok() || !o.message->aa) continue;
        for (const auto& rr : o.message->answer) {
          if (rr.owner != name) continue;
          if (rr.type == rrtype::CNAME) {
            std::string d = "cname-at-ns-target " + name.to_fqdn();
            auto& defects = record(zone).step.defects;
            if (std::find(defects.begin(), defects.end(), d) == defects.end()) defects.push_back(d);
            continue;
          }
          if (const auto* a = rr.address(); a && rr.type == t) {
            out.insert(*a);
            data.add_address(name, zone, *a);
          }
        }
      }
    }
    return out;
  }

  bool answers_for(const DomainName& zone, const IpAddress& server) {
    auto o = ask(zone, server, zone, rrtype::NS);
    if (!o.ok() || !is_authoritative_ns(*o.message, zone)) return false;
    absorb_child_ns(zone, *o.message);
    record(zone).step.responsive.insert(server);
    return true;
  }

  static std::vector<IpAddress> of_family(const AddressSet& s, IpFamily f) {
    std::vector<IpAddress> out;
    for (const auto& a : s)
      if (a.family() == f && a.is_usable()) out.push_back(a);
    return out;
  }

  Eval eval_root(IpFamily f) {
    auto key = std::make_pair(DomainName::root(), f);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    auto root = DomainName::root();
    auto& rec = record(root);
    Eval ev;
    bool parent_ok = false;
    for (const auto& h : hints) {
      rec.step.parent_ns_set.insert(h.name);
      rec.step.glue[h.name].insert(h.address);
      if (h.address.family() != f) continue;
      if (answers_for(root, h.address)) parent_ok = true;
    }
    std::vector<IpAddress> responsive;
    for (const auto& a : record(root).step.responsive)
      if (a.family() == f) responsive.push_back(a);
    bool child_ok = false;
    bool lenient = parent_ok;
    NameSet child = record(root).step.child_ns_set.value_or(NameSet{});
    for (const auto& n : child) {
      auto addrs = query_addresses(root, n, responsive);
      record(root).step.addresses[n].insert(addrs.begin(), addrs.end());
      for (const auto& a : of_family(addrs, f))
        if (answers_for(root, a)) child_ok = lenient = true;
    }
    ev.resolved = parent_ok && child_ok;
    for (const auto& a : record(root).step.responsive)
      if (a.family() == f) ev.servers.push_back(a);
    auto& v = record(root).step.verdict[idx(f)];
    v = FamilyVerdict{parent_ok, child_ok, ev.resolved, lenient, true};
    memo[key] = ev;
    return ev;
  }

  // True if `candidate` is a zone cut below `parent`. Servers are tried in turn
  // until one gives a conclusive answer: a referral, an authoritative NS RRset,
  // or an authoritative negative answer. NXDOMAIN is not taken to mean that
  // nothing exists further down.
  bool probe_cut(const DomainName& parent, const Eval& pev, const DomainName& candidate) {
    for (const auto& s : pev.servers) {
      auto o = ask(candidate, s, candidate, rrtype::NS);
      if (!o.ok()) continue;
      if (is_referral_for(*o.message, candidate)) {
        absorb_referral(parent, candidate, *o.message);
        return true;
      }
      if (is_authoritative_ns(*o.message, candidate)) {
        record(candidate).parent = parent;
        absorb_child_ns(candidate, *o.message);
        return true;
      }
      if (o.message->aa && (o.message->rcode == Rcode::NoError || o.message->rcode == Rcode::NXDomain)) return false;
    }
    return false;
  }

  struct WalkEnd {
    DomainName zone;
    Eval eval;
    bool complete = false;  // reached the deepest cut on the path
  };

  WalkEnd walk(const DomainName& name, IpFamily f, std::size_t& low) {
    WalkEnd w{DomainName::root(), eval_root(f), false};
    auto chain = enclosing_zones(name);
    int cuts = 0;
    for (std::size_t i = 1; i < chain.size(); ++i) {
      if (!w.eval.resolved) return w;
      const auto& c = chain[i];
      if (!probe_cut(w.zone, w.eval, c)) continue;
      if (++cuts > opts.max_depth)
        throw DepthLimitExceeded("more than " + std::to_string(opts.max_depth) + " zone cuts below " +
                                 name.to_string());
      w.eval = eval_zone(c, w.zone, f, low);
      w.zone = c;
    }
    w.complete = true;
    return w;
  }

  AddressSet host_addresses(const DomainName& host, IpFamily f, std::size_t& low) {
    if (++subordinate > opts.max_subordinate) {
      --subordinate;
      throw DepthLimitExceeded("subordinate resolution deeper than " +
                               std::to_string(opts.max_subordinate) + " at " + host.to_string());
    }
    AddressSet out;
    try {
      auto w = walk(host, f, low);
      if (w.eval.resolved) out = query_addresses(w.zone, host, w.eval.servers);
    } catch (...) {
      --subordinate;
      throw;
    }
    --subordinate;
    return out;
  }

  Eval eval_zone(const DomainName& zone, const DomainName& parent, IpFamily f, std::size_t& low) {
    auto key = std::make_pair(zone, f);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (auto it = in_progress.find(key); it != in_progress.end()) {
      low = std::min(low, it->second);
      return {};
    }
    const std::size_t my = stack_depth++;
    in_progress[key] = my;
    std::size_t my_low = kNoCut;

    auto& rec0 = record(zone);
    rec0.parent = parent;
    const NameSet parent_set = rec0.step.parent_ns_set;

    std::map<DomainName, AddressSet> resolved_addrs;
    auto addrs_for = [&](const DomainName& n) -> AddressSet {
      if (auto it = resolved_addrs.find(n); it != resolved_addrs.end()) return it->second;
      AddressSet s;
      if (!is_in_bailiwick(n, zone)) s = host_addresses(n, f, my_low);
      resolved_addrs[n] = s;
      return s;
    };

    bool parent_ok = false;
    for (const auto& n : parent_set) {
      AddressSet addrs;
      if (is_in_bailiwick(n, zone)) {
        auto g = record(zone).step.glue.find(n);
        if (g != record(zone).step.glue.end()) addrs = g->second;
      } else {
        addrs = addrs_for(n);
        record(zone).step.addresses[n].insert(addrs.begin(), addrs.end());
      }
      for (const auto& a : of_family(addrs, f))
        if (answers_for(zone, a)) parent_ok = true;
    }

    // In-bailiwick addresses as served by the zone itself, both families.
    std::vector<IpAddress> servers;
    for (const auto& a : record(zone).step.responsive)
      if (a.family() == f) servers.push_back(a);
    NameSet child_set = record(zone).step.child_ns_set.value_or(NameSet{});
    NameSet all = parent_set;
    all.insert(child_set.begin(), child_set.end());
    std::map<DomainName, AddressSet> apex;
    for (const auto& n : all) {
      if (!is_in_bailiwick(n, zone)) continue;
      apex[n] = query_addresses(zone, n, servers);
      record(zone).step.addresses[n].insert(apex[n].begin(), apex[n].end());
    }

    bool child_ok = false;
    bool lenient = parent_ok;
    for (const auto& n : all) {
      AddressSet addrs = is_in_bailiwick(n, zone) ? apex[n] : addrs_for(n);
      if (!is_in_bailiwick(n, zone)) record(zone).step.addresses[n].insert(addrs.begin(), addrs.end());
      bool ok = false;
      for (const auto& a : of_family(addrs, f))
        if (answers_for(zone, a)) ok = true;
      if (ok && child_set.count(n)) child_ok = true;
      lenient = lenient || ok;
    }

    Eval ev;
    ev.resolved = parent_ok && child_ok;
    for (const auto& a : record(zone).step.responsive)
      if (a.family() == f) ev.servers.push_back(a);

    --stack_depth;
    in_progress.erase(key);
    record(zone).step.verdict[idx(f)] = FamilyVerdict{parent_ok, child_ok, ev.resolved, lenient, true};
    if (ev.resolved || my_low >= my) {
      memo[key] = ev;
    } else {
      low = std::min(low, my_low);
    }
    return ev;
  }

  bool zone_resolves(const DomainName& zone, IpFamily f) {
    if (!includes(opts.filter, f)) return false;
    std::size_t low = kNoCut;
    auto w = walk(zone, f, low);
    return w.zone == zone && w.eval.resolved;
  }
};

ChainResolver::ChainResolver(QueryEngine& engine, RootHints hints, ResolverOptions opts)
    : impl_(std::make_unique<Impl>(engine, std::move(hints), opts)), opts_(opts) {}

ChainResolver::~ChainResolver() = default;

AddressSet ChainResolver::resolve_host(const DomainName& host, IpFamily f) {
  std::size_t low = kNoCut;
  AddressSet all = impl_->host_addresses(host, f, low);
  AddressSet out;
  for (const auto& a : all)
    if (a.family() == f) out.insert(a);
  return out;
}

bool ChainResolver::zone_resolves(const DomainName& zone, IpFamily f) { return impl_->zone_resolves(zone, f); }

ZoneDataset ChainResolver::evidence() const {
  ZoneDataset d = impl_->data;
  d.finalize();
  return d;
}

ChainResult ChainResolver::resolve_chain(const DomainName& target) {
  ChainResult r;
  r.target = target;
  std::array<std::optional<Impl::WalkEnd>, 2> ends;
  bool any_root = false;
  for (auto f : {IpFamily::v4, IpFamily::v6}) {
    if (!includes(opts_.filter, f)) continue;
    std::size_t low = kNoCut;
    ends[idx(f)] = impl_->walk(target, f, low);
    if (impl_->memo[{DomainName::root(), f}].resolved) any_root = true;
  }
  if (!any_root) throw RootUnreachable("no root server answered over the selected protocols");

  // Deepest cut discovered over any protocol.
  r.zone = DomainName::root();
  for (const auto& e : ends)
    if (e && e->zone.label_count() > r.zone.label_count()) r.zone = e->zone;

  std::array<bool, 2> ok{false, false};
  for (auto f : {IpFamily::v4, IpFamily::v6}) {
    const auto& e = ends[idx(f)];
    ok[idx(f)] = e && e->zone == r.zone && e->eval.resolved;
  }
  r.status.state = state_of(ok[0], ok[1]);

  auto data = evidence();
  if (const auto* rs = data.find(r.zone)) {
    r.status.intent_v6 = has_intent(*rs, IpFamily::v6);
    auto parent = impl_->zones.count(r.zone) ? impl_->zones[r.zone].parent : std::nullopt;
    if (parent) {
      EvidenceLookup lookup{[&data](const DomainName& n) { return data.zone_of(n); },
                            [this](const DomainName& z, IpFamily f) { return impl_->zone_resolves(z, f); }};
      if (!ok[idx(IpFamily::v6)] && includes(opts_.filter, IpFamily::v6))
        r.status.v6_failures = diagnose(*rs, *parent, lookup, IpFamily::v6);
      if (!ok[idx(IpFamily::v4)] && includes(opts_.filter, IpFamily::v4))
        r.status.v4_failures = diagnose(*rs, *parent, lookup, IpFamily::v4);
    }
  }

  for (const auto& z : enclosing_zones(r.zone)) {
    auto it = impl_->zones.find(z);
    if (it == impl_->zones.end()) continue;
    if (!z.is_root() && it->second.step.parent_ns_set.empty() && !it->second.step.child_ns_set) continue;
    r.steps.push_back(it->second.step);
  }

  if (opts_.enrich) {
    std::vector<IpAddress> servers;
    if (const auto* s = r.step(r.zone))
      for (const auto& a : s->responsive)
        if (includes(opts_.filter, a.family())) servers.push_back(a);
    r.enrichment = enrich(r.zone, servers, impl_->engine);
  }
  return r;
}

ChainResult resolve_chain(const DomainName& target, QueryEngine& engine, const RootHints& hints,
                          ResolverOptions opts) {
  ChainResolver resolver(engine, hints, opts);
  return resolver.resolve_chain(target);
}

std::vector<LivenessResult> probe_ns_liveness(const DomainName& zone, const std::vector<IpAddress>& addresses,
                                              QueryEngine& engine) {
  std::vector<LivenessResult> out;
  for (const auto& a : addresses) {
    LivenessResult r{a, LivenessResult::Status::unresponsive};
    if (!a.is_usable()) {
      r.status = LivenessResult::Status::invalid;
    } else {
      auto o = engine.query(a, zone, rrtype::SOA);
      if (o.ok()) r.status = LivenessResult::Status::responsive;
    }
    out.push_back(r);
  }
  return out;
}

Enrichment enrich(const DomainName& zone, const std::vector<IpAddress>& servers, QueryEngine& engine) {
  Enrichment e;
  static const DomainName version_bind = DomainName::parse("version.bind");
  for (const auto& s : servers) {
    ServerEnrichment se;
    se.server = s;
    for (auto t : {rrtype::NS, rrtype::TXT, rrtype::SOA, rrtype::MX}) {
      auto o = engine.query(s, zone, t);
      auto& list = se.records[t];
      if (!o.ok()) {
        se.errors.push_back(t.to_string() + ": " + std::string(to_string(o.kind)));
        continue;
      }
      if (o.message->rcode != Rcode::NoError) {
        se.errors.push_back(t.to_string() + ": " + std::string(to_string(o.message->rcode)));
        continue;
      }
      for (const auto& rr : o.message->answer)
        if (rr.type == t && rr.owner == zone) list.push_back(rr);
    }
    auto o = engine.query(s, version_bind, rrtype::TXT, rrclass::CH);
    if (o.ok() && o.message->rcode == Rcode::NoError) {
      for (const auto& rr : o.message->answer) {
        if (rr.type != rrtype::TXT) continue;
        std::string v;
        for (const auto& part : parse_txt(rr)) v += part;
        se.version = v;
        e.server_version[s] = v;
        break;
      }
    }
    e.servers.push_back(std::move(se));
  }
  return e;
}

}  // namespace v6ready
