#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace v6ready;
using namespace v6ready::testing;

namespace {

std::optional<DnsMessage> ask(Universe& u, const char* server, const char* qname, RRType type,
                              RRClass cls = rrclass::IN, TransportKind kind = TransportKind::udp) {
  auto q = DnsMessage::make_query(DomainName::parse(qname), type, cls, 77);
  auto bytes = u.respond(ip(server), kind, encode(q));
  if (!bytes) return std::nullopt;
  return decode(*bytes);
}

FixtureError::Code error_of(const Fixture& fx) {
  try {
    Universe u(fx);
  } catch (const FixtureError& e) {
    return e.code();
  }
  ADD_FAILURE() << "fixture accepted";
  return FixtureError::Code::InvalidFixture;
}

}  // namespace

TEST(Universe, ReferenceServesSixZones) {
  Universe u(load_fixture(fixture_path("fig1.json")));
  auto zones = u.zones();
  EXPECT_EQ(zones.size(), 6u);
  std::set<DomainName> served;
  for (const auto& a : u.listening())
    for (const auto& z : u.served_by(a)) served.insert(z);
  EXPECT_EQ(served, std::set<DomainName>(zones.begin(), zones.end()));
}

TEST(Universe, EmptyFixtureIsRootOnly) {
  Universe u(Fixture{});
  auto zones = u.zones();
  ASSERT_EQ(zones.size(), 1u);
  EXPECT_TRUE(zones[0].is_root());
  EXPECT_FALSE(u.root_hints().empty());
  auto r = resolve_in(u, ".");
  EXPECT_EQ(r.status.state, ResolutionState::dual);
}

TEST(Universe, RejectsBrokenFixtures) {
  Fixture no_root;
  std::uint32_t next = 1;
  no_root.zones.push_back(dual_zone("com", 1, next));
  EXPECT_EQ(error_of(no_root), FixtureError::Code::OrphanZone);

  auto dup = chain_fixture();
  dup.zones.push_back(dup.zones.back());
  EXPECT_EQ(error_of(dup), FixtureError::Code::DuplicateZone);

  auto clash = chain_fixture();
  zone_in(clash, "dep.tld").ns[0].addresses = zone_in(clash, "tld").ns[0].addresses;
  EXPECT_EQ(error_of(clash), FixtureError::Code::AddressCollision);

  auto bare = chain_fixture();
  zone_in(bare, "dep.tld").ns.clear();
  EXPECT_EQ(error_of(bare), FixtureError::Code::InvalidFixture);
}

TEST(Universe, ReferralsCarryGlue) {
  Universe u(load_fixture(fixture_path("fig1_right.json")));
  // a0.org serves org and refers sub-zones.
  auto m = ask(u, "10.0.1.1", "www.example.org", rrtype::A);
  ASSERT_TRUE(m);
  EXPECT_FALSE(m->aa);
  EXPECT_EQ(m->rcode, Rcode::NoError);
  EXPECT_TRUE(m->answer.empty());
  NameSet ns;
  for (const auto& rr : m->authority)
    if (rr.type == rrtype::NS) ns.insert(*rr.target());
  EXPECT_EQ(ns, (NameSet{dn("ns1.example.org"), dn("ns2.example.org")}));
  std::set<IpAddress> glue;
  for (const auto& rr : m->additional) glue.insert(*rr.address());
  EXPECT_EQ(glue, (std::set<IpAddress>{ip("192.0.2.11"), ip("192.0.2.12"), ip("2001:db8::11"), ip("2001:db8::12")}));
}

TEST(Universe, DropAaaaGlueOnlyAffectsTheReferral) {
  Universe u(load_fixture(fixture_path("fig1_right.json")));
  auto ref = ask(u, "192.0.2.11", "sub.example.org", rrtype::NS);
  ASSERT_TRUE(ref);
  EXPECT_FALSE(ref->aa);
  for (const auto& rr : ref->additional) EXPECT_EQ(rr.type, rrtype::A);
  auto apex = ask(u, "192.0.2.3", "ns3.sub.example.org", rrtype::AAAA);
  ASSERT_TRUE(apex);
  EXPECT_TRUE(apex->aa);
  ASSERT_EQ(apex->answer.size(), 1u);
  EXPECT_EQ(*apex->answer[0].address(), ip("2001:db8::3"));
}

TEST(Universe, AuthoritativeAnswersAndNegatives) {
  Universe u(load_fixture(fixture_path("healthy.json")));
  auto ns = ask(u, "192.0.2.21", "example.com", rrtype::NS);
  ASSERT_TRUE(ns);
  EXPECT_TRUE(ns->aa);
  EXPECT_EQ(ns->answer.size(), 2u);

  auto nodata = ask(u, "192.0.2.21", "www.example.com", rrtype::MX);
  ASSERT_TRUE(nodata);
  EXPECT_EQ(nodata->rcode, Rcode::NoError);
  EXPECT_TRUE(nodata->answer.empty());
  ASSERT_EQ(nodata->authority.size(), 1u);
  EXPECT_EQ(nodata->authority[0].type, rrtype::SOA);

  auto nx = ask(u, "192.0.2.21", "nope.example.com", rrtype::A);
  ASSERT_TRUE(nx);
  EXPECT_EQ(nx->rcode, Rcode::NXDomain);

  auto refused = ask(u, "192.0.2.21", "example.org", rrtype::NS);
  ASSERT_TRUE(refused);
  EXPECT_EQ(refused->rcode, Rcode::Refused);

  auto version = ask(u, "192.0.2.21", "version.bind", rrtype::TXT, rrclass::CH);
  ASSERT_TRUE(version);
  ASSERT_EQ(version->answer.size(), 1u);
  EXPECT_EQ(parse_txt(version->answer[0]), std::vector<std::string>{"mockd 1.0"});
}

TEST(Universe, BlackholesAndNonListeningAddresses) {
  auto fx = chain_fixture();
  zone_in(fx, "zone.tld").defects.insert(Defect::blackhole_v6);
  Universe u(fx);
  auto v6 = zone_in(fx, "zone.tld").ns[0].addresses[1];
  auto v4 = zone_in(fx, "zone.tld").ns[0].addresses[0];
  EXPECT_FALSE(ask(u, v6.to_string().c_str(), "zone.tld", rrtype::NS));
  EXPECT_TRUE(ask(u, v4.to_string().c_str(), "zone.tld", rrtype::NS));
  EXPECT_FALSE(u.live_for(v6, dn("zone.tld")));
  EXPECT_TRUE(u.live_for(v4, dn("zone.tld")));
  // Nothing listens here.
  auto q = encode(DnsMessage::make_query(dn("zone.tld"), rrtype::NS));
  auto reply = u.exchange(ip("10.200.0.1"), TransportKind::udp, q, Millis{3000});
  EXPECT_NE(reply.status, Transport::Reply::Status::ok);
}

TEST(Universe, LatencyAndLossShapeTheClock) {
  Universe u(chain_fixture());
  auto a = ip("10.0.0.1");
  u.set_latency(a, Millis{40});
  auto q = encode(DnsMessage::make_query(DomainName::root(), rrtype::NS));
  auto before = u.now();
  ASSERT_EQ(u.exchange(a, TransportKind::udp, q, Millis{3000}).status, Transport::Reply::Status::ok);
  EXPECT_EQ(u.now() - before, Millis{40});
  u.set_loss(a, 1.0);
  EXPECT_FALSE(u.live_for(a, DomainName::root()));
  before = u.now();
  EXPECT_EQ(u.exchange(a, TransportKind::udp, q, Millis{3000}).status, Transport::Reply::Status::timeout);
  EXPECT_EQ(u.now() - before, Millis{3000});
  EXPECT_EQ(u.packet_count(), 2u);
}

TEST(Universe, SameSeedSamePacketLog) {
  auto run = [] {
    auto ru = random_universe(7, 50, DefectRates::mixed(0.1));
    Universe u(ru.fixture, 7);
    std::size_t i = 0;
    for (const auto& a : u.listening())
      if (i++ % 5 == 0) u.set_loss(a, 0.3);
    crawl_universe(u, fast_policy());
    return u.packets();
  };
  auto a = run();
  auto b = run();
  ASSERT_EQ(a.size(), b.size());
  ASSERT_GT(a.size(), 100u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].seq, b[i].seq);
    EXPECT_EQ(a[i].time, b[i].time);
    EXPECT_EQ(a[i].server, b[i].server);
    EXPECT_EQ(a[i].transport, b[i].transport);
    EXPECT_EQ(a[i].query, b[i].query);
    EXPECT_EQ(a[i].response, b[i].response);
    if (::testing::Test::HasFailure()) break;
  }
}

TEST(Fixtures, JsonRoundTrip) {
  for (const char* f : {"fig1.json", "fig1_left.json", "fig1_right.json", "healthy.json"}) {
    auto fx = load_fixture(fixture_path(f));
    auto text = fixture_to_json(fx);
    EXPECT_EQ(fixture_to_json(parse_fixture(text)), text) << f;
  }
  auto fx = random_universe(3, 20, DefectRates::mixed(0.3)).fixture;
  auto text = fixture_to_json(fx);
  EXPECT_EQ(fixture_to_json(parse_fixture(text)), text);
  EXPECT_THROW(parse_fixture("{\"zones\": [{\"zone\": 5}]}"), FixtureError);
  EXPECT_THROW(parse_fixture("not json"), FixtureError);
}

TEST(Export, CrawlTuplesUseTableOneShape) {
  Universe u(load_fixture(fixture_path("fig1_left.json")));
  crawl_universe(u, fast_policy());
  auto tuples = export_tuples(u.packets());
  ASSERT_FALSE(tuples.empty());
  bool found = false;
  for (const auto& t : tuples) {
    EXPECT_GE(t.count, 1u);
    EXPECT_GE(t.time_first, kExportEpoch);
    EXPECT_LE(t.time_first, t.time_last);
    if (t.rrname == dn("example.org") && t.rrtype == rrtype::NS && t.bailiwick == dn("org")) {
      found = true;
      EXPECT_EQ(t.rdata, (std::vector<std::string>{"ns1.example.net.", "ns2.example.net."}));
    }
  }
  EXPECT_TRUE(found);
  // Unique on (rrname, rrtype, bailiwick, rdata).
  std::set<std::tuple<DomainName, std::uint16_t, DomainName, std::vector<std::string>>> keys;
  for (const auto& t : tuples) EXPECT_TRUE(keys.insert({t.rrname, t.rrtype.value, t.bailiwick, t.rdata}).second);
}

TEST(Export, HealthyUniverseIsDualEverywhere) {
  auto ru = random_universe(21, 40, DefectRates::none());
  Universe u(ru.fixture);
  auto crawl = crawl_universe(u, fast_policy());
  auto from_log = run_passive(export_tuples(u.packets()));
  auto from_model = run_passive(export_zone_data(u));
  for (const auto& z : u.zones()) {
    if (z.is_root()) continue;
    for (auto f : {IpFamily::v4, IpFamily::v6}) {
      auto i = static_cast<int>(f);
      EXPECT_TRUE(ru.truth.at(z)[i]) << z.to_string();
      EXPECT_TRUE(crawl.verdicts.at(z)[i]) << z.to_string();
      EXPECT_TRUE(from_log.table.resolves(z, f)) << z.to_string();
      EXPECT_TRUE(from_model.table.resolves(z, f)) << z.to_string();
    }
  }
}
