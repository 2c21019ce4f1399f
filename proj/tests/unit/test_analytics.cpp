#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "test_support.hpp"
#include "v6ready/analytics.hpp"

using namespace v6ready;
using namespace v6ready::testing;

namespace {

const char* kPsl = R"(// test list
com
net
uk
co.uk
*.ck
!www.ck
// ===BEGIN PRIVATE DOMAINS===
blogspot.com
// ===END PRIVATE DOMAINS===
)";

PublicSuffixList psl() { return PublicSuffixList::parse(kPsl); }
std::set<std::string> tlds() { return parse_tld_list("# iana\nCOM\nnet\nuk\nck\n"); }

ZoneVerdict failing(const std::string& zone, NameSet ns) {
  ZoneVerdict v;
  v.zone = DomainName::parse(zone);
  v.status = ResolutionStatus{};
  v.status->state = ResolutionState::v4_only;
  v.ns = std::move(ns);
  return v;
}

NameSet hosted_by(const char* op) {
  return {DomainName::parse(std::string("ns1.") + op), DomainName::parse(std::string("ns2.") + op)};
}

}  // namespace

TEST(PublicSuffixList, ExactWildcardAndExceptionRules) {
  auto p = psl();
  EXPECT_EQ(p.size(), 7u);
  auto uk = p.public_suffix(dn("bbc.co.uk"));
  EXPECT_TRUE(uk.matched);
  EXPECT_EQ(uk.labels, 2u);
  EXPECT_EQ(p.public_suffix(dn("foo.bar.ck")).labels, 2u);
  EXPECT_EQ(p.public_suffix(dn("www.ck")).labels, 1u);
  auto priv = p.public_suffix(dn("me.blogspot.com"));
  EXPECT_EQ(priv.labels, 2u);
  EXPECT_TRUE(priv.is_private);
  auto unknown = p.public_suffix(dn("a.b.zz"));
  EXPECT_FALSE(unknown.matched);
  EXPECT_EQ(unknown.labels, 1u);
  EXPECT_EQ(p.registered_domain(dn("a.b.example.com")), dn("example.com"));
  EXPECT_EQ(p.registered_domain(dn("co.uk")), std::nullopt);
}

TEST(GroupDomain, HierarchyLevels) {
  auto p = psl();
  auto t = tlds();
  EXPECT_EQ(group_domain(dn("bbc.co.uk"), p, t).level, HierarchyGroup::second_level);
  EXPECT_EQ(group_domain(dn("a.b.example.com"), p, t).level, HierarchyGroup::below_second_level);
  EXPECT_EQ(group_domain(dn("com"), p, t).level, HierarchyGroup::tld);
  EXPECT_EQ(group_domain(dn("co.uk"), p, t).level, HierarchyGroup::tld);
  auto zz = group_domain(dn("a.b.zz"), p, t);
  EXPECT_TRUE(zz.unknown_suffix);
  EXPECT_EQ(zz.level, HierarchyGroup::below_second_level);
  EXPECT_TRUE(group_domain(dn("me.blogspot.com"), p, t).private_suffix);
}

TEST(GroupDomain, StableUnderNormalization) {
  auto p = psl();
  auto t = tlds();
  auto a = group_domain(DomainName::parse("WWW.BBC.Co.Uk."), p, t);
  auto b = group_domain(DomainName::parse(DomainName::parse("WWW.BBC.Co.Uk.").to_string()), p, t);
  EXPECT_EQ(a.level, b.level);
  EXPECT_EQ(a.registered, b.registered);
  EXPECT_EQ(a.labels(), b.labels());
}

TEST(GroupDomain, RankTiers) {
  EXPECT_EQ(rank_tier(1), RankTier::top1k);
  EXPECT_EQ(rank_tier(1000), RankTier::top1k);
  EXPECT_EQ(rank_tier(1001), RankTier::top1k_10k);
  EXPECT_EQ(rank_tier(10000), RankTier::top1k_10k);
  EXPECT_EQ(rank_tier(10001), RankTier::top10k_100k);
  EXPECT_EQ(rank_tier(100001), RankTier::top100k_1m);
  EXPECT_EQ(rank_tier(1000000), RankTier::top100k_1m);
  EXPECT_EQ(rank_tier(1000001), std::nullopt);

  auto top = Toplist::parse("rank,domain\n1,example.com\n2500,bbc.co.uk\n");
  EXPECT_EQ(top.size(), 2u);
  auto p = psl();
  auto t = tlds();
  auto g = group_domain(dn("a.b.example.com"), p, t, &top);
  EXPECT_EQ(g.tier, RankTier::top1k);
  EXPECT_EQ(g.labels(), (std::vector<std::string>{"below-sld", "top1k"}));
  EXPECT_EQ(group_domain(dn("bbc.co.uk"), p, t, &top).tier, RankTier::top1k_10k);
  EXPECT_EQ(group_domain(dn("other.com"), p, t, &top).tier, std::nullopt);

  auto bare = Toplist::parse("a.com\nb.com\n");
  EXPECT_EQ(bare.rank(dn("b.com")), 2u);
}

TEST(NsSetCdf, TopSetCoversSeventyPercent) {
  std::vector<ZoneVerdict> vs;
  for (int i = 0; i < 7; ++i) vs.push_back(failing("a" + std::to_string(i) + ".com", hosted_by("opa.com")));
  for (int i = 0; i < 2; ++i) vs.push_back(failing("b" + std::to_string(i) + ".com", hosted_by("opb.net")));
  vs.push_back(failing("c.com", hosted_by("opc.co.uk")));
  // Neither a resolvable zone nor one with an unknown parent counts.
  auto ok = failing("fine.com", hosted_by("opa.com"));
  ok.status->state = ResolutionState::dual;
  vs.push_back(ok);
  auto orphan = failing("orphan.com", hosted_by("opa.com"));
  orphan.status.reset();
  vs.push_back(orphan);

  auto cdf = nsset_cdf(vs, psl(), {});
  EXPECT_EQ(cdf.total_zones, 10u);
  ASSERT_EQ(cdf.sets.size(), 3u);
  EXPECT_EQ(cdf.sets[0].key, NsSetKey{"opa.com"});
  EXPECT_EQ(cdf.sets[0].zones, 7u);
  ASSERT_EQ(cdf.points.size(), 3u);
  EXPECT_DOUBLE_EQ(cdf.points[0].zone_fraction, 0.7);
  EXPECT_DOUBLE_EQ(cdf.points[0].set_fraction, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(cdf.points[1].zone_fraction, 0.9);
  EXPECT_DOUBLE_EQ(cdf.points[2].zone_fraction, 1.0);
  EXPECT_DOUBLE_EQ(cdf.top10_share, 1.0);
  EXPECT_DOUBLE_EQ(cdf.top10pct_share, 0.7);
}

TEST(NsSetCdf, OneSetIsAStep) {
  std::vector<ZoneVerdict> vs;
  for (int i = 0; i < 5; ++i) vs.push_back(failing("z" + std::to_string(i) + ".com", hosted_by("only.net")));
  auto cdf = nsset_cdf(vs, psl(), {});
  ASSERT_EQ(cdf.points.size(), 1u);
  EXPECT_DOUBLE_EQ(cdf.points[0].set_fraction, 1.0);
  EXPECT_DOUBLE_EQ(cdf.points[0].zone_fraction, 1.0);
  EXPECT_TRUE(nsset_cdf({}, psl(), {}).points.empty());
}

TEST(NsSetCdf, OperatorRulesMergeAggregates) {
  auto rules = OperatorRules::parse("# operators\nawsdns-[0-9]+\\.(com|net|co\\.uk) awsdns\n");
  EXPECT_EQ(rules.size(), 1u);
  EXPECT_EQ(rules.collapse("awsdns-12.com"), "awsdns");
  EXPECT_EQ(rules.collapse("AWSDNS-7.co.uk"), "awsdns");
  EXPECT_EQ(rules.collapse("example.com"), "example.com");
  NameSet ns{dn("ns-1.awsdns-12.com"), dn("ns-2.awsdns-34.net"), dn("ns-3.awsdns-56.co.uk")};
  EXPECT_EQ(ns_set_key(ns, psl(), rules), NsSetKey{"awsdns"});
  EXPECT_EQ(ns_set_key(ns, psl(), {}).size(), 3u);
}

namespace {

std::vector<ZoneVerdict> random_verdicts(std::mt19937_64& rng, int zones, int operators) {
  std::vector<ZoneVerdict> vs;
  for (int i = 0; i < zones; ++i) {
    NameSet ns;
    int n = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < n; ++k)
      ns.insert(DomainName::parse("ns" + std::to_string(k) + ".op" + std::to_string(rng() % operators) + ".com"));
    auto v = failing("z" + std::to_string(i) + ".org", ns);
    if (rng() % 5 == 0) v.status->state = ResolutionState::dual;
    vs.push_back(std::move(v));
  }
  return vs;
}

}  // namespace

TEST(NsSetCdf, MatchesSortAndSumRecount) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    auto vs = random_verdicts(rng, 1 + static_cast<int>(rng() % 200), 1 + static_cast<int>(rng() % 15));
    // Recount: operator label is the text after "ns<k>.".
    std::map<std::set<std::string>, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& v : vs) {
      if (v.status->state == ResolutionState::dual) continue;
      std::set<std::string> key;
      for (const auto& n : v.ns) {
        auto s = n.to_string();
        key.insert(s.substr(s.find('.') + 1));
      }
      ++counts[key];
      ++total;
    }
    std::vector<std::size_t> sizes;
    for (const auto& [k, n] : counts) sizes.push_back(n);
    std::sort(sizes.rbegin(), sizes.rend());

    auto cdf = nsset_cdf(vs, psl(), {});
    ASSERT_EQ(cdf.total_zones, total);
    ASSERT_EQ(cdf.sets.size(), sizes.size());
    std::size_t cum = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      cum += sizes[i];
      EXPECT_EQ(cdf.sets[i].zones, sizes[i]);
      EXPECT_EQ(counts.at(cdf.sets[i].key), sizes[i]);
      EXPECT_NEAR(cdf.points[i].zone_fraction, static_cast<double>(cum) / static_cast<double>(total), 1e-12);
      if (i == std::min<std::size_t>(10, sizes.size()) - 1)
        EXPECT_NEAR(cdf.top10_share, static_cast<double>(cum) / static_cast<double>(total), 1e-12);
      if (i > 0) EXPECT_GE(cdf.points[i].zone_fraction, cdf.points[i - 1].zone_fraction);
    }
    if (!cdf.points.empty()) EXPECT_DOUBLE_EQ(cdf.points.back().zone_fraction, 1.0);
  }
}

TEST(NsSetCdf, CollapsingNeverAddsSets) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    auto vs = random_verdicts(rng, 100, 12);
    OperatorRules rules;
    int n = static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) rules.add("op[" + std::to_string(rng() % 10) + "-9]\\.com", "big" + std::to_string(i));
    EXPECT_LE(nsset_cdf(vs, psl(), rules).sets.size(), nsset_cdf(vs, psl(), {}).sets.size());
  }
}

TEST(Csv, StateAndCdfTables) {
  std::vector<ZoneVerdict> vs;
  for (int i = 0; i < 3; ++i) vs.push_back(failing("f" + std::to_string(i) + ".com", hosted_by("opa.com")));
  auto good = failing("good.com", hosted_by("opa.com"));
  good.status->state = ResolutionState::dual;
  vs.push_back(good);
  auto groups = group_verdicts(vs, psl(), tlds());
  ASSERT_TRUE(groups.count("all"));
  ASSERT_TRUE(groups.count("sld"));
  std::map<std::string, SnapshotStats> stats;
  std::map<std::string, NsSetCdf> cdfs;
  for (const auto& [g, v] : groups) {
    stats[g] = snapshot_stats(v, "2015-01");
    cdfs[g] = nsset_cdf(v, psl(), {});
  }
  std::ostringstream states, cdf;
  write_states_csv(states, "2015-01", stats);
  write_nsset_cdf_csv(cdf, "2015-01", cdfs);
  auto s = states.str();
  EXPECT_EQ(s.substr(0, s.find('\n')),
            "month,group,zones,unknown_parent,dual,v4_only,v6_only,none,dual_pct,v4_only_pct,v6_only_pct,none_pct,"
            "intent_v6");
  EXPECT_NE(s.find("2015-01,all,4,0,1,3,0,0,25,75,0,0,"), std::string::npos) << s;
  EXPECT_NE(cdf.str().find("2015-01,all,1,\"opa.com\",3,1,1\n"), std::string::npos) << cdf.str();
}
