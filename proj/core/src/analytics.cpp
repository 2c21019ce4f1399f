#include "v6ready/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace v6ready {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<DomainName> try_name(std::string_view text) {
  try {
    return DomainName::parse(text);
  } catch (const NameError&) {
    return std::nullopt;
  }
}

std::string plain(const DomainName& n) { return n.to_string(); }

}  // namespace

PublicSuffixList PublicSuffixList::parse(const std::string& text) {
  PublicSuffixList psl;
  std::istringstream in(text);
  std::string line;
  bool priv = false;
  while (std::getline(in, line)) {
    if (line.find("===BEGIN PRIVATE DOMAINS===") != std::string::npos) priv = true;
    if (line.find("===END PRIVATE DOMAINS===") != std::string::npos) priv = false;
    // A rule is the first whitespace-delimited token of a non-comment line.
    auto t = trim(line);
    if (t.empty() || t.rfind("//", 0) == 0) continue;
    t = t.substr(0, t.find_first_of(" \t"));
    psl.add_rule(t, priv);
  }
  return psl;
}

PublicSuffixList PublicSuffixList::load(const std::string& path) { return parse(read_file(path)); }

void PublicSuffixList::add_rule(std::string_view rule, bool is_private) {
  if (rule.empty()) return;
  if (rule[0] == '!') {
    if (auto n = try_name(rule.substr(1))) exception_[*n] = is_private;
  } else if (rule.rfind("*.", 0) == 0) {
    if (auto n = try_name(rule.substr(2))) wildcard_[*n] = is_private;
  } else if (rule == "*") {
    wildcard_[DomainName::root()] = is_private;
  } else if (auto n = try_name(rule)) {
    exact_[*n] = is_private;
  }
}

PublicSuffixList::Match PublicSuffixList::public_suffix(const DomainName& name) const {
  Match best;
  for (std::size_t k = 1; k <= name.label_count(); ++k) {
    auto s = name.suffix(k);
    if (auto it = exception_.find(s); it != exception_.end()) {
      return {k - 1, true, it->second};
    }
    if (auto it = exact_.find(s); it != exact_.end() && k >= best.labels) best = {k, true, it->second};
    if (auto it = wildcard_.find(s.parent()); it != wildcard_.end() && k >= best.labels)
      best = {k, true, it->second};
  }
  return best;
}

std::optional<DomainName> PublicSuffixList::registered_domain(const DomainName& name) const {
  auto m = public_suffix(name);
  if (name.label_count() <= m.labels) return std::nullopt;
  return name.suffix(m.labels + 1);
}

std::set<std::string> parse_tld_list(const std::string& text) {
  std::set<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (!t.empty() && t.back() == '.') t.pop_back();
    out.insert(t);
  }
  return out;
}

std::set<std::string> load_tld_list(const std::string& path) { return parse_tld_list(read_file(path)); }

Toplist Toplist::parse(const std::string& text) {
  Toplist t;
  std::istringstream in(text);
  std::string line;
  std::uint64_t line_rank = 0;
  while (std::getline(in, line)) {
    auto s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    ++line_rank;
    std::uint64_t rank = line_rank;
    std::string domain = s;
    if (auto comma = s.find(','); comma != std::string::npos) {
      auto head = trim(s.substr(0, comma));
      domain = trim(s.substr(comma + 1));
      try {
        std::size_t used = 0;
        rank = std::stoull(head, &used);
        if (used != head.size()) continue;  // header row
      } catch (const std::exception&) {
        continue;
      }
    }
    if (auto n = try_name(domain)) t.add(*n, rank);
  }
  return t;
}

Toplist Toplist::load(const std::string& path) { return parse(read_file(path)); }

void Toplist::add(const DomainName& domain, std::uint64_t rank) {
  auto [it, fresh] = ranks_.emplace(domain, rank);
  if (!fresh) it->second = std::min(it->second, rank);
}

std::optional<std::uint64_t> Toplist::rank(const DomainName& domain) const {
  auto it = ranks_.find(domain);
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::uint64_t, DomainName>> Toplist::entries() const {
  std::vector<std::pair<std::uint64_t, DomainName>> out;
  for (const auto& [d, r] : ranks_) out.emplace_back(r, d);
  std::sort(out.begin(), out.end());
  return out;
}

std::string_view to_string(HierarchyGroup g) {
  switch (g) {
    case HierarchyGroup::tld: return "tld";
    case HierarchyGroup::second_level: return "sld";
    case HierarchyGroup::below_second_level: return "below-sld";
  }
  return "?";
}

std::string_view to_string(RankTier t) {
  switch (t) {
    case RankTier::top1k: return "top1k";
    case RankTier::top1k_10k: return "1k-10k";
    case RankTier::top10k_100k: return "10k-100k";
    case RankTier::top100k_1m: return "100k-1m";
  }
  return "?";
}

std::optional<RankTier> rank_tier(std::uint64_t rank) {
  if (rank == 0) return std::nullopt;
  if (rank <= 1000) return RankTier::top1k;
  if (rank <= 10000) return RankTier::top1k_10k;
  if (rank <= 100000) return RankTier::top10k_100k;
  if (rank <= 1000000) return RankTier::top100k_1m;
  return std::nullopt;
}

std::vector<std::string> DomainGroup::labels() const {
  std::vector<std::string> out{std::string(to_string(level))};
  if (tier) out.emplace_back(to_string(*tier));
  return out;
}

DomainGroup group_domain(const DomainName& name, const PublicSuffixList& psl, const std::set<std::string>& tlds,
                         const Toplist* toplist) {
  DomainGroup g;
  if (name.label_count() <= 1) {
    g.level = HierarchyGroup::tld;
    g.unknown_suffix = name.is_root() || (!tlds.count(plain(name)) && !psl.public_suffix(name).matched);
    return g;
  }
  auto m = psl.public_suffix(name);
  g.unknown_suffix = !m.matched;
  g.private_suffix = m.is_private;
  if (name.label_count() <= m.labels) {
    g.level = HierarchyGroup::tld;
    return g;
  }
  g.level = name.label_count() == m.labels + 1 ? HierarchyGroup::second_level : HierarchyGroup::below_second_level;
  g.registered = name.suffix(m.labels + 1);
  if (toplist)
    if (auto r = toplist->rank(*g.registered)) g.tier = rank_tier(*r);
  return g;
}

OperatorRules OperatorRules::parse(const std::string& text) {
  OperatorRules r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto sp = t.find_first_of(" \t");
    if (sp == std::string::npos) throw std::invalid_argument("operator rule needs a replacement: " + t);
    r.add(t.substr(0, sp), trim(t.substr(sp + 1)));
  }
  return r;
}

OperatorRules OperatorRules::load(const std::string& path) { return parse(read_file(path)); }

void OperatorRules::add(const std::string& pattern, std::string replacement) {
  rules_.emplace_back(std::regex(pattern, std::regex::ECMAScript | std::regex::icase), std::move(replacement));
}

std::string OperatorRules::collapse(const std::string& aggregate) const {
  for (const auto& [re, repl] : rules_)
    if (std::regex_match(aggregate, re)) return repl;
  return aggregate;
}

std::string to_string(const NsSetKey& key) {
  std::string out;
  for (const auto& k : key) {
    if (!out.empty()) out += ',';
    out += k;
  }
  return out;
}

NsSetKey ns_set_key(const NameSet& ns, const PublicSuffixList& psl, const OperatorRules& rules) {
  NsSetKey key;
  for (const auto& n : ns) {
    auto reg = psl.registered_domain(n);
    key.insert(rules.collapse(plain(reg ? *reg : n)));
  }
  return key;
}

NsSetCdf nsset_cdf(const std::vector<ZoneVerdict>& verdicts, const PublicSuffixList& psl,
                   const OperatorRules& rules) {
  std::map<NsSetKey, std::size_t> counts;
  NsSetCdf out;
  for (const auto& v : verdicts) {
    if (!v.status || v.status->resolves(IpFamily::v6)) continue;
    ++counts[ns_set_key(v.ns, psl, rules)];
    ++out.total_zones;
  }
  for (auto& [k, n] : counts) out.sets.push_back({k, n});
  std::stable_sort(out.sets.begin(), out.sets.end(),
                   [](const NsSetShare& a, const NsSetShare& b) { return a.zones > b.zones; });
  const double sets = static_cast<double>(out.sets.size());
  const double total = static_cast<double>(out.total_zones);
  std::size_t cum = 0;
  const std::size_t top_pct = static_cast<std::size_t>(std::ceil(sets * 0.1));
  for (std::size_t i = 0; i < out.sets.size(); ++i) {
    cum += out.sets[i].zones;
    out.points.push_back({static_cast<double>(i + 1) / sets, static_cast<double>(cum) / total});
    if (i + 1 == std::min<std::size_t>(10, out.sets.size())) out.top10_share = static_cast<double>(cum) / total;
    if (i + 1 == top_pct) out.top10pct_share = static_cast<double>(cum) / total;
  }
  return out;
}

std::map<std::string, std::vector<ZoneVerdict>> group_verdicts(const std::vector<ZoneVerdict>& verdicts,
                                                               const PublicSuffixList& psl,
                                                               const std::set<std::string>& tlds,
                                                               const Toplist* toplist) {
  std::map<std::string, std::vector<ZoneVerdict>> out;
  for (const auto& v : verdicts) {
    out["all"].push_back(v);
    for (const auto& label : group_domain(v.zone, psl, tlds, toplist).labels()) out[label].push_back(v);
  }
  return out;
}

void write_states_csv(std::ostream& out, const std::string& month,
                      const std::map<std::string, SnapshotStats>& by_group) {
  out << "month,group,zones,unknown_parent,dual,v4_only,v6_only,none,dual_pct,v4_only_pct,v6_only_pct,none_pct,"
         "intent_v6\n";
  for (const auto& [group, s] : by_group) {
    out << month << ',' << group << ',' << s.zones << ',' << s.unknown_parent << ',' << s.dual << ','
        << s.v4_only << ',' << s.v6_only << ',' << s.none;
    for (auto st : {ResolutionState::dual, ResolutionState::v4_only, ResolutionState::v6_only, ResolutionState::none})
      out << ',' << s.percent(st);
    out << ',' << s.intent_v6 << '\n';
  }
}

void write_causes_csv(std::ostream& out, const std::string& month,
                      const std::map<std::string, SnapshotStats>& by_group) {
  out << "month,group,population,cause,count,pct\n";
  for (const auto& [group, s] : by_group) {
    for (auto k : kAllCauses) {
      auto it = s.breakdown.counts.find(k);
      std::size_t n = it == s.breakdown.counts.end() ? 0 : it->second;
      out << month << ',' << group << ',' << s.breakdown.population << ',' << cause_id(k) << ',' << n << ','
          << s.breakdown.percent(k) << '\n';
    }
  }
}

void write_nsset_cdf_csv(std::ostream& out, const std::string& month, const std::map<std::string, NsSetCdf>& by_group) {
  out << "month,group,rank,ns_set,zones,set_fraction,zone_fraction\n";
  for (const auto& [group, cdf] : by_group) {
    for (std::size_t i = 0; i < cdf.sets.size(); ++i) {
      out << month << ',' << group << ',' << i + 1 << ",\"" << to_string(cdf.sets[i].key) << "\","
          << cdf.sets[i].zones << ',' << cdf.points[i].set_fraction << ',' << cdf.points[i].zone_fraction << '\n';
    }
  }
}

}  // namespace v6ready
