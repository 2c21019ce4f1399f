#include <sstream>

#include "json.hpp"
#include "v6ready/resolver.hpp"

namespace v6ready {

namespace {

using nlohmann::json;

json names_json(const NameSet& s) {
  json out = json::array();
  for (const auto& n : s) out.push_back(n.to_string());
  return out;
}

json addrs_json(const AddressSet& s) {
  json out = json::array();
  for (const auto& a : s) out.push_back(a.to_string());
  return out;
}

json causes_json(const CauseSet& causes) {
  json out = json::array();
  for (const auto& [kind, c] : causes) {
    json views = json::array();
    for (auto v : c.views) views.push_back(std::string(to_string(v)));
    out.push_back({{"cause", std::string(cause_id(kind))}, {"witnesses", names_json(c.witnesses)}, {"views", views}});
  }
  return out;
}

json verdict_json(const FamilyVerdict& v) {
  if (!v.evaluated) return nullptr;
  return {{"resolved", v.resolved}, {"parent_ok", v.parent_ok}, {"child_ok", v.child_ok}, {"lenient", v.lenient}};
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

std::string chain_report_json(const ChainResult& r, int indent) {
  json doc;
  doc["target"] = r.target.to_string();
  doc["zone"] = r.zone.to_string();
  doc["state"] = std::string(to_string(r.status.state));
  doc["v4_resolvable"] = r.resolves(IpFamily::v4);
  doc["v6_resolvable"] = r.resolves(IpFamily::v6);
  doc["intent_v6"] = r.status.intent_v6;
  doc["v6_failures"] = causes_json(r.status.v6_failures);
  doc["v4_failures"] = causes_json(r.status.v4_failures);

  doc["chain"] = json::array();
  for (const auto& s : r.steps) {
    json sj;
    sj["zone"] = s.zone.to_string();
    sj["parent_ns"] = names_json(s.parent_ns_set);
    sj["child_ns"] = s.child_ns_set ? names_json(*s.child_ns_set) : json(nullptr);
    json glue = json::object();
    for (const auto& [ns, a] : s.glue) glue[ns.to_string()] = addrs_json(a);
    sj["glue"] = glue;
    json addrs = json::object();
    for (const auto& [ns, a] : s.addresses) addrs[ns.to_string()] = addrs_json(a);
    sj["addresses"] = addrs;
    json responsive = json::array();
    for (const auto& a : s.responsive) responsive.push_back(a.to_string());
    sj["responsive"] = responsive;
    sj["v4"] = verdict_json(s.of(IpFamily::v4));
    sj["v6"] = verdict_json(s.of(IpFamily::v6));
    json queries = json::array();
    for (const auto& q : s.queried_servers) {
      json qj{{"server", q.server.to_string()},
              {"qname", q.qname.to_string()},
              {"qtype", q.qtype.to_string()},
              {"outcome", std::string(to_string(q.outcome.kind))},
              {"attempts", q.outcome.attempts},
              {"transport", q.outcome.transport == TransportKind::tcp ? "tcp" : "udp"},
              {"edns", q.outcome.edns_used}};
      if (q.outcome.message) qj["rcode"] = std::string(to_string(q.outcome.message->rcode));
      queries.push_back(std::move(qj));
    }
    sj["queries"] = queries;
    if (!s.defects.empty()) sj["defects"] = s.defects;
    doc["chain"].push_back(std::move(sj));
  }

  json servers = json::array();
  for (const auto& se : r.enrichment.servers) {
    json sj{{"server", se.server.to_string()}};
    if (se.version) sj["version"] = *se.version;
    json recs = json::object();
    for (const auto& [t, rrs] : se.records) {
      json list = json::array();
      for (const auto& rr : rrs) list.push_back(rr.rdata_text());
      recs[t.to_string()] = list;
    }
    sj["records"] = recs;
    if (!se.errors.empty()) sj["errors"] = se.errors;
    servers.push_back(std::move(sj));
  }
  doc["enrichment"] = servers;
  return doc.dump(indent);
}

std::string chain_report_text(const ChainResult& r) {
  std::ostringstream out;
  out << r.target.to_string() << " (zone " << r.zone.to_string() << "): " << to_string(r.status.state)
      << "  v4=" << yes_no(r.resolves(IpFamily::v4)) << " v6=" << yes_no(r.resolves(IpFamily::v6)) << '\n';
  for (const auto& s : r.steps) {
    out << "  " << s.zone.to_string();
    for (auto f : {IpFamily::v4, IpFamily::v6}) {
      const auto& v = s.of(f);
      out << "  " << to_string(f) << ':';
      if (!v.evaluated) {
        out << '-';
        continue;
      }
      out << (v.resolved ? "ok" : "fail");
      if (!v.resolved) out << "(parent=" << yes_no(v.parent_ok) << ",child=" << yes_no(v.child_ok) << ')';
    }
    out << '\n';
    out << "    parent NS:";
    for (const auto& n : s.parent_ns_set) out << ' ' << n.to_string();
    out << '\n';
    if (s.child_ns_set) {
      out << "    child NS: ";
      for (const auto& n : *s.child_ns_set) out << ' ' << n.to_string();
      out << '\n';
    }
    for (const auto& d : s.defects) out << "    note: " << d << '\n';
  }
  auto causes = [&](const char* label, const CauseSet& set) {
    for (const auto& [kind, c] : set) {
      out << "  " << label << ' ' << cause_id(kind);
      for (auto v : c.views) out << " [" << to_string(v) << ']';
      out << ':';
      for (const auto& w : c.witnesses) out << ' ' << w.to_string();
      out << '\n';
    }
  };
  causes("v6 failure:", r.status.v6_failures);
  causes("v4 failure:", r.status.v4_failures);
  for (const auto& [a, v] : r.enrichment.server_version) out << "  version " << a.to_string() << ": " << v << '\n';
  return out.str();
}

}  // namespace v6ready
