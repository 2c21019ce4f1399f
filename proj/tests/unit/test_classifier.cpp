#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "v6ready/classifier.hpp"

using namespace v6ready;
using namespace v6ready::testing;

namespace {

PassiveTuple t(const char* name, RRType type, const char* bailiwick, std::vector<std::string> rdata) {
  PassiveTuple p;
  p.rrname = dn(name);
  p.rrtype = type;
  p.bailiwick = dn(bailiwick);
  p.rdata = std::move(rdata);
  return p;
}

// Referral from the parent plus the apex NS RRset, both listing `ns`.
void delegate(std::vector<PassiveTuple>& out, const char* zone, const char* parent, std::vector<std::string> ns) {
  out.push_back(t(zone, rrtype::NS, parent, ns));
  out.push_back(t(zone, rrtype::NS, zone, ns));
}

std::vector<PassiveTuple> top_levels() {
  std::vector<PassiveTuple> v;
  delegate(v, "org", ".", {"a0.org"});
  v.push_back(t("a0.org", rrtype::A, ".", {"10.0.1.1"}));
  v.push_back(t("a0.org", rrtype::AAAA, ".", {"fd00::101"}));
  v.push_back(t("a0.org", rrtype::A, "org", {"10.0.1.1"}));
  v.push_back(t("a0.org", rrtype::AAAA, "org", {"fd00::101"}));
  delegate(v, "net", ".", {"a0.net"});
  v.push_back(t("a0.net", rrtype::A, ".", {"10.0.2.1"}));
  v.push_back(t("a0.net", rrtype::AAAA, ".", {"fd00::201"}));
  v.push_back(t("a0.net", rrtype::A, "net", {"10.0.2.1"}));
  v.push_back(t("a0.net", rrtype::AAAA, "net", {"fd00::201"}));
  return v;
}

std::set<CauseKind> kinds_of(const CauseSet& c) {
  std::set<CauseKind> out;
  for (const auto& [k, _] : c) out.insert(k);
  return out;
}

}  // namespace

TEST(Classifier, OutOfBailiwickNsWithOnlyARecords) {
  auto v = top_levels();
  delegate(v, "example.net", "net", {"ns1.example.net", "ns2.example.net"});
  for (const char* bw : {"net", "example.net"}) {
    v.push_back(t("ns1.example.net", rrtype::A, bw, {"192.0.2.1"}));
    v.push_back(t("ns2.example.net", rrtype::A, bw, {"192.0.2.2"}));
  }
  delegate(v, "example.org", "org", {"ns1.example.net", "ns2.example.net"});
  auto r = run_passive(v);
  const auto& st = r.statuses.at(dn("example.org"));
  EXPECT_EQ(st.state, ResolutionState::v4_only);
  EXPECT_EQ(kinds_of(st.v6_failures), std::set<CauseKind>{CauseKind::NoAAAAForNS});
  EXPECT_EQ(st.v6_failures.at(CauseKind::NoAAAAForNS).witnesses,
            (NameSet{dn("ns1.example.net"), dn("ns2.example.net")}));
  EXPECT_FALSE(st.intent_v6);
}

TEST(Classifier, InBailiwickNsWithoutV6Glue) {
  auto v = top_levels();
  delegate(v, "example.org", "org", {"ns1.example.org"});
  for (const char* bw : {"org", "example.org"}) {
    v.push_back(t("ns1.example.org", rrtype::A, bw, {"192.0.2.11"}));
    v.push_back(t("ns1.example.org", rrtype::AAAA, bw, {"2001:db8::11"}));
  }
  delegate(v, "sub.example.org", "example.org", {"ns3.sub.example.org", "ns4.sub.example.org"});
  v.push_back(t("ns3.sub.example.org", rrtype::A, "example.org", {"192.0.2.3"}));
  v.push_back(t("ns4.sub.example.org", rrtype::A, "example.org", {"192.0.2.4"}));
  v.push_back(t("ns3.sub.example.org", rrtype::A, "sub.example.org", {"192.0.2.3"}));
  v.push_back(t("ns4.sub.example.org", rrtype::A, "sub.example.org", {"192.0.2.4"}));
  v.push_back(t("ns3.sub.example.org", rrtype::AAAA, "sub.example.org", {"2001:db8::3"}));
  v.push_back(t("ns4.sub.example.org", rrtype::AAAA, "sub.example.org", {"2001:db8::4"}));
  auto r = run_passive(v);
  const auto& st = r.statuses.at(dn("sub.example.org"));
  EXPECT_EQ(st.state, ResolutionState::v4_only);
  EXPECT_EQ(kinds_of(st.v6_failures), std::set<CauseKind>{CauseKind::MissingGlue});
  EXPECT_EQ(st.v6_failures.at(CauseKind::MissingGlue).views, std::set<View>{View::parent});
  EXPECT_TRUE(st.intent_v6);
  EXPECT_EQ(r.statuses.at(dn("example.org")).state, ResolutionState::dual);
}

TEST(Classifier, GlueWithoutApexAddress) {
  auto v = top_levels();
  delegate(v, "example.org", "org", {"ns1.example.org"});
  v.push_back(t("ns1.example.org", rrtype::A, "org", {"192.0.2.11"}));
  v.push_back(t("ns1.example.org", rrtype::AAAA, "org", {"2001:db8::11"}));
  v.push_back(t("ns1.example.org", rrtype::A, "example.org", {"192.0.2.11"}));
  auto r = run_passive(v);
  const auto& st = r.statuses.at(dn("example.org"));
  EXPECT_EQ(kinds_of(st.v6_failures), std::set<CauseKind>{CauseKind::InBailiwickNSWithoutAAAA});
  EXPECT_EQ(st.v6_failures.at(CauseKind::InBailiwickNSWithoutAAAA).views, std::set<View>{View::child});
  const auto& flags = r.table.zones.at(dn("example.org")).of(IpFamily::v6);
  EXPECT_TRUE(flags.glue_res);
  EXPECT_FALSE(flags.zone_res);
}

TEST(Classifier, BrokenParentBreaksChildrenRegardlessOfOwnRecords) {
  auto v = top_levels();
  delegate(v, "example.org", "org", {"ns1.example.org"});
  for (const char* bw : {"org", "example.org"}) v.push_back(t("ns1.example.org", rrtype::A, bw, {"192.0.2.11"}));
  // The child is perfectly configured for both protocols.
  delegate(v, "sub.example.org", "example.org", {"ns1.sub.example.org"});
  for (const char* bw : {"example.org", "sub.example.org"}) {
    v.push_back(t("ns1.sub.example.org", rrtype::A, bw, {"192.0.2.3"}));
    v.push_back(t("ns1.sub.example.org", rrtype::AAAA, bw, {"2001:db8::3"}));
  }
  auto r = run_passive(v);
  EXPECT_EQ(r.statuses.at(dn("example.org")).state, ResolutionState::v4_only);
  const auto& st = r.statuses.at(dn("sub.example.org"));
  EXPECT_EQ(st.state, ResolutionState::v4_only);
  ASSERT_EQ(kinds_of(st.v6_failures), std::set<CauseKind>{CauseKind::ParentUnresolvable});
  EXPECT_EQ(st.v6_failures.at(CauseKind::ParentUnresolvable).witnesses, NameSet{dn("example.org")});
  EXPECT_TRUE(st.v6_failures.at(CauseKind::ParentUnresolvable).views.empty());
}

TEST(Classifier, OutOfBailiwickNsInBrokenZone) {
  auto v = top_levels();
  // example.net has AAAA at its apex but none in the glue.
  delegate(v, "example.net", "net", {"ns1.example.net"});
  v.push_back(t("ns1.example.net", rrtype::A, "net", {"192.0.2.1"}));
  v.push_back(t("ns1.example.net", rrtype::A, "example.net", {"192.0.2.1"}));
  v.push_back(t("ns1.example.net", rrtype::AAAA, "example.net", {"2001:db8::1"}));
  delegate(v, "example.org", "org", {"ns1.example.net"});
  auto r = run_passive(v);
  EXPECT_EQ(kinds_of(r.statuses.at(dn("example.net")).v6_failures), std::set<CauseKind>{CauseKind::MissingGlue});
  const auto& st = r.statuses.at(dn("example.org"));
  EXPECT_EQ(kinds_of(st.v6_failures), std::set<CauseKind>{CauseKind::OobNSZoneUnresolvable});
  EXPECT_EQ(st.v6_failures.at(CauseKind::OobNSZoneUnresolvable).views, (std::set<View>{View::parent, View::child}));
  EXPECT_TRUE(st.intent_v6);
}

TEST(Classifier, DiagnosisIsSymmetricForIpv4) {
  auto v = top_levels();
  delegate(v, "example.org", "org", {"ns1.example.org"});
  for (const char* bw : {"org", "example.org"}) v.push_back(t("ns1.example.org", rrtype::AAAA, bw, {"2001:db8::11"}));
  auto r = run_passive(v);
  const auto& st = r.statuses.at(dn("example.org"));
  EXPECT_EQ(st.state, ResolutionState::v6_only);
  EXPECT_TRUE(st.v6_failures.empty());
  EXPECT_EQ(kinds_of(st.v4_failures), std::set<CauseKind>{CauseKind::NoAAAAForNS});
}

TEST(Classifier, MissingParentEvidenceIsAnError) {
  ZoneRecordSet rs;
  rs.zone = dn("example.org");
  EvidenceLookup lookup{[](const DomainName&) { return DomainName::root(); },
                        [](const DomainName&, IpFamily) { return true; }};
  EXPECT_THROW(classify(rs, std::nullopt, lookup), MissingParentEvidence);
}

TEST(Classifier, CauseIdsRoundTrip) {
  for (auto k : kAllCauses) EXPECT_EQ(parse_cause_id(cause_id(k)), k);
  EXPECT_EQ(cause_id(CauseKind::MissingGlue), "missing-glue");
  EXPECT_FALSE(parse_cause_id("lame"));
}

namespace {

ResolutionStatus failing(std::initializer_list<CauseKind> causes, bool intent = true) {
  ResolutionStatus st;
  st.state = ResolutionState::v4_only;
  st.intent_v6 = intent;
  for (auto k : causes) st.v6_failures[k] = FailureCause{k, {}, {}};
  return st;
}

}  // namespace

TEST(FailureBreakdown, EmptyInputIsAllZero) {
  auto b = failure_breakdown({});
  EXPECT_EQ(b.population, 0u);
  for (auto k : kAllCauses) {
    EXPECT_EQ(b.counts[k], 0u);
    EXPECT_EQ(b.percent(k), 0.0);
  }
}

TEST(FailureBreakdown, FourMissingGlueSixNoAaaa) {
  std::vector<ResolutionStatus> v;
  for (int i = 0; i < 4; ++i) v.push_back(failing({CauseKind::MissingGlue}));
  for (int i = 0; i < 6; ++i) v.push_back(failing({CauseKind::NoAAAAForNS}));
  ResolutionStatus ok;
  ok.state = ResolutionState::dual;
  ok.intent_v6 = true;
  v.push_back(ok);
  auto b = failure_breakdown(v);
  EXPECT_EQ(b.population, 10u);
  EXPECT_DOUBLE_EQ(b.percent(CauseKind::MissingGlue), 40.0);
  EXPECT_DOUBLE_EQ(b.percent(CauseKind::NoAAAAForNS), 60.0);
}

TEST(FailureBreakdown, MatchesRecountOnRandomSets) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ResolutionStatus> v;
    std::size_t pop = 0;
    std::array<std::size_t, 5> expect{};
    int n = static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      ResolutionStatus st;
      st.intent_v6 = rng() % 3 != 0;
      bool v6_ok = rng() % 4 == 0;
      st.state = v6_ok ? ResolutionState::dual : ResolutionState::v4_only;
      if (!v6_ok)
        for (auto k : kAllCauses)
          if (rng() % 3 == 0) st.v6_failures[k] = FailureCause{k, {}, {}};
      if (!v6_ok && st.v6_failures.empty()) st.v6_failures[CauseKind::NoAAAAForNS] = {CauseKind::NoAAAAForNS, {}, {}};
      if (st.intent_v6 && !v6_ok) {
        ++pop;
        for (const auto& [k, _] : st.v6_failures) ++expect[static_cast<std::size_t>(k)];
      }
      v.push_back(std::move(st));
    }
    auto b = failure_breakdown(v);
    ASSERT_EQ(b.population, pop);
    for (auto k : kAllCauses) ASSERT_EQ(b.counts[k], expect[static_cast<std::size_t>(k)]);
  }
}
