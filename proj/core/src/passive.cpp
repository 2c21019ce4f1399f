#include "v6ready/passive.hpp"

#include <zlib.h>

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace v6ready {

namespace {

using json = nlohmann::json;

constexpr std::size_t idx(IpFamily f) { return static_cast<std::size_t>(f); }

template <typename T>
T parse_int(std::string_view s, const char* field) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw MalformedTuple(std::string("bad ") + field + ": '" + std::string(s) + "'");
  return v;
}

DomainName parse_name(std::string_view s, const char* field) {
  try {
    return DomainName::parse(s);
  } catch (const NameError& e) {
    throw MalformedTuple(std::string("bad ") + field + ": " + e.what());
  }
}

RRType parse_type(std::string_view s) {
  auto t = RRType::parse(s);
  if (!t) throw MalformedTuple("bad rrtype: '" + std::string(s) + "'");
  return *t;
}

void check(const PassiveTuple& t) {
  if (t.count < 1) throw MalformedTuple("count must be at least 1");
  if (t.time_first > t.time_last) throw MalformedTuple("time_first after time_last");
  if (t.rdata.empty()) throw MalformedTuple("empty rdata");
}

std::string_view trim_cr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

// Feeds lines to parsers, choosing the format at the first data line.
class LineSink {
 public:
  LineSink(ReadStats& stats, const std::function<void(PassiveTuple&&)>& sink)
      : stats_(stats), sink_(sink) {}

  void line(std::string_view raw) {
    ++stats_.lines;
    auto s = trim_cr(raw);
    std::size_t start = s.find_first_not_of(" \t");
    if (start == std::string_view::npos || s[start] == '#') return;
    if (!format_) format_ = s[start] == '{' ? TupleFormat::json : TupleFormat::tsv;
    try {
      auto t = *format_ == TupleFormat::json ? parse_tuple_json(s) : parse_tuple_tsv(s);
      ++stats_.tuples;
      sink_(std::move(t));
    } catch (const MalformedTuple&) {
      ++stats_.malformed;
    }
  }

 private:
  ReadStats& stats_;
  const std::function<void(PassiveTuple&&)>& sink_;
  std::optional<TupleFormat> format_;
};

std::string rdata_of(const PassiveTuple& t, std::size_t i) { return t.rdata.at(i); }

}  // namespace

PassiveTuple parse_tuple_tsv(std::string_view line) {
  line = trim_cr(line);
  std::vector<std::string_view> f;
  std::size_t pos = 0;
  while (true) {
    auto tab = line.find('\t', pos);
    f.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  if (f.size() < 7) throw MalformedTuple("expected 7 tab-separated fields, got " + std::to_string(f.size()));
  PassiveTuple t;
  t.count = parse_int<std::uint64_t>(f[0], "count");
  t.time_first = parse_int<std::int64_t>(f[1], "time_first");
  t.time_last = parse_int<std::int64_t>(f[2], "time_last");
  t.rrname = parse_name(f[3], "rrname");
  t.rrtype = parse_type(f[4]);
  t.bailiwick = parse_name(f[5], "bailiwick");
  for (std::size_t i = 6; i < f.size(); ++i)
    if (!f[i].empty()) t.rdata.emplace_back(f[i]);
  check(t);
  return t;
}

PassiveTuple parse_tuple_json(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedTuple(std::string("bad json: ") + e.what());
  }
  if (!j.is_object()) throw MalformedTuple("json tuple must be an object");
  PassiveTuple t;
  try {
    t.count = j.value("count", std::uint64_t{1});
    t.time_first = j.at("time_first").get<std::int64_t>();
    t.time_last = j.at("time_last").get<std::int64_t>();
    t.rrname = parse_name(j.at("rrname").get<std::string>(), "rrname");
    t.rrtype = parse_type(j.at("rrtype").get<std::string>());
    t.bailiwick = parse_name(j.at("bailiwick").get<std::string>(), "bailiwick");
    const auto& rd = j.at("rdata");
    if (rd.is_string())
      t.rdata.push_back(rd.get<std::string>());
    else
      for (const auto& v : rd) t.rdata.push_back(v.get<std::string>());
  } catch (const json::exception& e) {
    throw MalformedTuple(std::string("bad json field: ") + e.what());
  }
  check(t);
  return t;
}

std::string format_tuple(const PassiveTuple& t, TupleFormat fmt) {
  if (fmt == TupleFormat::json) {
    json j{{"count", t.count},
           {"time_first", t.time_first},
           {"time_last", t.time_last},
           {"rrname", t.rrname.to_fqdn()},
           {"rrtype", t.rrtype.to_string()},
           {"bailiwick", t.bailiwick.to_fqdn()},
           {"rdata", t.rdata}};
    return j.dump();
  }
  std::string out = std::to_string(t.count) + '\t' + std::to_string(t.time_first) + '\t' +
                    std::to_string(t.time_last) + '\t' + t.rrname.to_fqdn() + '\t' +
                    t.rrtype.to_string() + '\t' + t.bailiwick.to_fqdn();
  for (const auto& r : t.rdata) out += '\t' + r;
  return out;
}

ReadStats read_tuples(std::istream& in, const std::function<void(PassiveTuple&&)>& sink) {
  ReadStats stats;
  LineSink ls(stats, sink);
  std::string line;
  while (std::getline(in, line)) ls.line(line);
  return stats;
}

ReadStats read_tuple_file(const std::string& path, const std::function<void(PassiveTuple&&)>& sink) {
  gzFile gz = gzopen(path.c_str(), "rb");
  if (!gz) throw std::runtime_error("cannot open " + path);
  ReadStats stats;
  LineSink ls(stats, sink);
  std::string pending;
  char buf[1 << 16];
  while (true) {
    int n = gzread(gz, buf, sizeof buf);
    if (n < 0) {
      int err = 0;
      std::string msg = gzerror(gz, &err);
      gzclose(gz);
      throw std::runtime_error("read error in " + path + ": " + msg);
    }
    if (n == 0) break;
    pending.append(buf, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = pending.find('\n', start)) != std::string::npos; start = nl + 1)
      ls.line(std::string_view(pending).substr(start, nl - start));
    pending.erase(0, start);
  }
  gzclose(gz);
  if (!pending.empty()) ls.line(pending);
  return stats;
}

void Ingestor::add(const PassiveTuple& t) {
  const bool is_addr = t.rrtype == rrtype::A || t.rrtype == rrtype::AAAA;
  if (t.rrtype == rrtype::CNAME) {
    ++stats_.cname_ignored;
    return;
  }
  if (t.rrtype != rrtype::NS && !is_addr) {
    ++stats_.other_ignored;
    return;
  }
  for (std::size_t i = 0; i < t.rdata.size(); ++i) {
    auto text = rdata_of(t, i);
    if (t.rrtype == rrtype::NS) {
      DomainName target;
      try {
        target = DomainName::parse(text);
      } catch (const NameError&) {
        ++stats_.malformed;
        continue;
      }
      ++stats_.ns_records;
      if (!data_.add_ns(t.rrname, t.bailiwick, target)) ++stats_.untrusted;
    } else {
      auto addr = IpAddress::parse(text);
      if (!addr || address_type(addr->family()) != t.rrtype) {
        ++stats_.malformed;
        continue;
      }
      ++stats_.address_records;
      if (!data_.add_address(t.rrname, t.bailiwick, *addr)) ++stats_.untrusted;
    }
  }
}

ZoneDataset Ingestor::finish() {
  data_.finalize();
  return std::move(data_);
}

ZoneDataset ingest(const std::vector<PassiveTuple>& tuples, IngestStats* stats) {
  Ingestor ing;
  for (const auto& t : tuples) ing.add(t);
  if (stats) *stats = ing.stats();
  return ing.finish();
}

bool ResolutionTable::resolves(const DomainName& zone, IpFamily f) const {
  if (zone.is_root()) return true;
  auto it = zones.find(zone);
  return it != zones.end() && it->second.of(f).res;
}

ResolutionTable fixed_point(const ZoneDataset& data) {
  ResolutionTable table;
  std::size_t known = 0;
  for (const auto& [zone, _] : data.zones()) {
    if (zone.is_root()) continue;
    auto& zr = table.zones[zone];
    zr.parent = data.parent_of(zone);
    if (zr.parent) ++known;
  }
  const int cap = static_cast<int>(table.zones.size()) + 1;

  for (auto f : {IpFamily::v4, IpFamily::v6}) {
    std::size_t prev_count = 0;
    bool first = true;
    int passes = 0;
    while (true) {
      if (++passes > cap)
        throw IterationCapExceeded("no fixed point after " + std::to_string(cap) + " passes");
      const ResolutionTable prev = table;
      auto lookup = dataset_lookup(data, [&prev](const DomainName& z, IpFamily fam) {
        return prev.resolves(z, fam);
      });
      std::size_t count = 0;
      for (auto& [zone, zr] : table.zones) {
        if (!zr.parent) continue;
        ZoneFlags flags;
        if (prev.resolves(*zr.parent, f)) {
          auto ev = evaluate_views(*data.find(zone), *zr.parent, lookup, f);
          flags.glue_res = ev.glue_res;
          flags.zone_res = ev.zone_res;
          flags.res = ev.glue_res && ev.zone_res;
          for (const auto* m : {&ev.parent_ns, &ev.child_ns})
            for (const auto& [ns, ok] : *m)
              if (ok && !is_in_bailiwick(ns, zone)) table.ns_res[ns][idx(f)] = true;
        }
        zr.of(f) = flags;
        if (flags.res) ++count;
      }
      if (count == known || (!first && count == prev_count)) break;
      first = false;
      prev_count = count;
    }
    table.passes[idx(f)] = passes;
  }
  return table;
}

std::map<DomainName, ResolutionStatus> classify_all(const ZoneDataset& data,
                                                    const ResolutionTable& table) {
  std::map<DomainName, ResolutionStatus> out;
  auto lookup = dataset_lookup(data, [&table](const DomainName& z, IpFamily f) {
    return table.resolves(z, f);
  });
  for (const auto& [zone, zr] : table.zones) {
    if (!zr.parent) continue;
    out.emplace(zone, classify(*data.find(zone), zr.parent, lookup));
  }
  return out;
}

std::vector<ZoneVerdict> build_verdicts(const ZoneDataset& data, const ResolutionTable& table) {
  auto statuses = classify_all(data, table);
  std::vector<ZoneVerdict> out;
  for (const auto& [zone, zr] : table.zones) {
    ZoneVerdict v;
    v.zone = zone;
    v.flags = zr;
    v.ns = data.find(zone)->all_ns();
    if (auto it = statuses.find(zone); it != statuses.end()) v.status = it->second;
    out.push_back(std::move(v));
  }
  return out;
}

std::size_t SnapshotStats::count(ResolutionState s) const {
  switch (s) {
    case ResolutionState::dual: return dual;
    case ResolutionState::v4_only: return v4_only;
    case ResolutionState::v6_only: return v6_only;
    case ResolutionState::none: return none;
  }
  return 0;
}

double SnapshotStats::percent(ResolutionState s) const {
  return zones == 0 ? 0.0 : 100.0 * static_cast<double>(count(s)) / static_cast<double>(zones);
}

double SnapshotStats::intent_percent(ResolutionState s) const {
  if (intent_v6 == 0) return 0.0;
  auto it = intent_by_state.find(s);
  std::size_t n = it == intent_by_state.end() ? 0 : it->second;
  return 100.0 * static_cast<double>(n) / static_cast<double>(intent_v6);
}

SnapshotStats snapshot_stats(const std::vector<ZoneVerdict>& verdicts, std::string month) {
  SnapshotStats s;
  s.month = std::move(month);
  std::vector<ResolutionStatus> statuses;
  for (const auto& v : verdicts) {
    if (v.zone.is_root()) continue;
    if (!v.status) {
      ++s.unknown_parent;
      continue;
    }
    ++s.zones;
    switch (v.status->state) {
      case ResolutionState::dual: ++s.dual; break;
      case ResolutionState::v4_only: ++s.v4_only; break;
      case ResolutionState::v6_only: ++s.v6_only; break;
      case ResolutionState::none: ++s.none; break;
    }
    if (v.status->intent_v6) {
      ++s.intent_v6;
      ++s.intent_by_state[v.status->state];
    }
    statuses.push_back(*v.status);
  }
  s.breakdown = failure_breakdown(statuses);
  return s;
}

namespace {

std::string format_causes(const CauseSet& causes) {
  std::string out;
  for (const auto& [kind, c] : causes) {
    if (!out.empty()) out += ';';
    out += cause_id(kind);
    out += '@';
    if (c.views.empty()) out += '-';
    bool first = true;
    for (auto v : c.views) {
      if (!first) out += '+';
      out += to_string(v);
      first = false;
    }
    out += '=';
    first = true;
    for (const auto& w : c.witnesses) {
      if (!first) out += ',';
      out += w.to_fqdn();
      first = false;
    }
  }
  return out.empty() ? "-" : out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

CauseSet parse_causes(const std::string& text) {
  CauseSet out;
  if (text == "-") return out;
  for (const auto& entry : split(text, ';')) {
    auto at = entry.find('@');
    auto eq = entry.find('=', at);
    if (at == std::string::npos || eq == std::string::npos)
      throw std::invalid_argument("bad cause entry: " + entry);
    auto kind = parse_cause_id(entry.substr(0, at));
    if (!kind) throw std::invalid_argument("unknown cause: " + entry.substr(0, at));
    FailureCause c{*kind, {}, {}};
    auto views = entry.substr(at + 1, eq - at - 1);
    if (views != "-")
      for (const auto& v : split(views, '+')) c.views.insert(v == "parent" ? View::parent : View::child);
    for (const auto& w : split(entry.substr(eq + 1), ','))
      if (!w.empty()) c.witnesses.insert(DomainName::parse(w));
    out.emplace(*kind, std::move(c));
  }
  return out;
}

}  // namespace

void write_verdicts(std::ostream& out, const std::vector<ZoneVerdict>& verdicts) {
  out << "#v6ready-verdicts v1\n";
  out << "#zone\tstate\tparent\tglue_v4\tzone_v4\tres_v4\tglue_v6\tzone_v6\tres_v6\tintent_v6"
         "\tcauses_v6\tcauses_v4\tns\n";
  for (const auto& v : verdicts) {
    out << v.zone.to_fqdn() << '\t' << (v.status ? to_string(v.status->state) : "unknown") << '\t'
        << (v.flags.parent ? v.flags.parent->to_fqdn() : "-");
    for (auto f : {IpFamily::v4, IpFamily::v6}) {
      const auto& fl = v.flags.of(f);
      out << '\t' << fl.glue_res << '\t' << fl.zone_res << '\t' << fl.res;
    }
    out << '\t' << (v.status && v.status->intent_v6) << '\t'
        << (v.status ? format_causes(v.status->v6_failures) : "-") << '\t'
        << (v.status ? format_causes(v.status->v4_failures) : "-") << '\t';
    bool first = true;
    for (const auto& ns : v.ns) {
      if (!first) out << ',';
      out << ns.to_fqdn();
      first = false;
    }
    if (v.ns.empty()) out << '-';
    out << '\n';
  }
}

std::vector<ZoneVerdict> read_verdicts(std::istream& in) {
  std::vector<ZoneVerdict> out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!header) {
      if (line.rfind("#v6ready-verdicts v1", 0) != 0)
        throw std::invalid_argument("not a v6ready verdict file");
      header = true;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 13) throw std::invalid_argument("verdict row needs 13 fields: " + line);
    ZoneVerdict v;
    v.zone = DomainName::parse(f[0]);
    if (f[2] != "-") v.flags.parent = DomainName::parse(f[2]);
    for (std::size_t i = 0; i < 2; ++i) {
      auto& fl = v.flags.flags[i];
      fl.glue_res = f[3 + 3 * i] == "1";
      fl.zone_res = f[4 + 3 * i] == "1";
      fl.res = f[5 + 3 * i] == "1";
    }
    if (f[1] != "unknown") {
      auto st = parse_state(f[1]);
      if (!st) throw std::invalid_argument("bad state: " + f[1]);
      ResolutionStatus s;
      s.state = *st;
      s.intent_v6 = f[9] == "1";
      s.v6_failures = parse_causes(f[10]);
      s.v4_failures = parse_causes(f[11]);
      v.status = std::move(s);
    }
    if (f[12] != "-")
      for (const auto& ns : split(f[12], ',')) v.ns.insert(DomainName::parse(ns));
    out.push_back(std::move(v));
  }
  return out;
}

std::string snapshot_json(const SnapshotStats& s) {
  json states = json::object();
  for (auto st : {ResolutionState::dual, ResolutionState::v4_only, ResolutionState::v6_only,
                  ResolutionState::none})
    states[std::string(to_string(st))] = {{"count", s.count(st)}, {"percent", s.percent(st)}};
  json intent = json::object();
  for (auto st : {ResolutionState::dual, ResolutionState::v4_only, ResolutionState::v6_only,
                  ResolutionState::none})
    intent[std::string(to_string(st))] = s.intent_percent(st);
  json causes = json::object();
  for (auto k : kAllCauses) {
    auto it = s.breakdown.counts.find(k);
    causes[std::string(cause_id(k))] = {
        {"count", it == s.breakdown.counts.end() ? 0 : it->second},
        {"percent", s.breakdown.percent(k)}};
  }
  json j{{"format", "v6ready-snapshot v1"},
         {"month", s.month},
         {"zones", s.zones},
         {"unknown_parent", s.unknown_parent},
         {"states", states},
         {"intent_v6", {{"zones", s.intent_v6}, {"state_percent", intent}}},
         {"failures", {{"population", s.breakdown.population}, {"causes", causes}}}};
  return j.dump(2) + "\n";
}

}  // namespace v6ready
