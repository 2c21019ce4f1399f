#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace v6ready;
using namespace v6ready::testing;

namespace {

// Kleene iteration over the fixture model: each round recomputes every zone
// from the previous round's set until nothing changes.
GroundTruth kleene_truth(const Universe& u) {
  GroundTruth out;
  for (auto f : {IpFamily::v4, IpFamily::v6}) {
    auto live = [&](const AddressSet& addrs, const DomainName& zone) {
      for (const auto& a : addrs)
        if (a.family() == f && u.live_for(a, zone)) return true;
      return false;
    };
    std::set<DomainName> good;
    bool root_ok = false;
    for (const auto& ns : u.parent_ns_set(DomainName::root()))
      root_ok = root_ok || live(u.published(ns), DomainName::root());
    if (!root_ok) {
      for (const auto& z : u.zones())
        if (!z.is_root()) out[z][static_cast<int>(f)] = false;
      continue;
    }
    good.insert(DomainName::root());
    while (true) {
      std::set<DomainName> next = {DomainName::root()};
      for (const auto& z : u.zones()) {
        if (z.is_root() || !good.count(*u.parent_of(z))) continue;
        auto ns_ok = [&](const DomainName& ns, bool parent_view) {
          if (is_in_bailiwick(ns, z)) return live(parent_view ? u.glue(z, ns) : u.published(ns), z);
          return good.count(u.owner_zone(ns)) && live(u.published(ns), z);
        };
        bool p = false, c = false;
        for (const auto& ns : u.parent_ns_set(z)) p = p || ns_ok(ns, true);
        for (const auto& ns : u.child_ns_set(z)) c = c || ns_ok(ns, false);
        if (p && c) next.insert(z);
      }
      if (next == good) break;
      good = std::move(next);
    }
    for (const auto& z : u.zones())
      if (!z.is_root()) out[z][static_cast<int>(f)] = good.count(z) > 0;
  }
  return out;
}

}  // namespace

TEST(RandomUniverse, NoDefectsMeansDualEverywhere) {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto ru = random_universe(seed, 60, DefectRates::none());
    EXPECT_EQ(ru.truth.size(), 60u);
    for (const auto& [z, v] : ru.truth) {
      EXPECT_TRUE(v[0]) << z.to_string();
      EXPECT_TRUE(v[1]) << z.to_string();
    }
  }
}

TEST(RandomUniverse, RootBlackholeV6KillsAllV6) {
  auto ru = random_universe(4, 40, DefectRates::mixed(0.1));
  auto fx = ru.fixture;
  zone_in(fx, ".").defects.insert(Defect::blackhole_v6);
  auto truth = enumerate_ground_truth(Universe(fx));
  std::size_t v4 = 0;
  for (const auto& [z, v] : truth) {
    EXPECT_FALSE(v[1]) << z.to_string();
    v4 += v[0];
  }
  EXPECT_GT(v4, 0u);
}

TEST(RandomUniverse, SameSeedSameFixture) {
  auto a = random_universe(9, 50, DefectRates::mixed(0.2));
  auto b = random_universe(9, 50, DefectRates::mixed(0.2));
  EXPECT_EQ(fixture_to_json(a.fixture), fixture_to_json(b.fixture));
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_NE(fixture_to_json(random_universe(10, 50, DefectRates::mixed(0.2)).fixture), fixture_to_json(a.fixture));
}

TEST(RandomUniverse, TruthMatchesKleeneOracle) {
  std::size_t v6_failures = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto rates = DefectRates::mixed(0.1);
    rates.blackhole_v6 = 0.05;
    auto ru = random_universe(seed, 100, rates);
    Universe u(ru.fixture);
    auto oracle = kleene_truth(u);
    ASSERT_EQ(oracle.size(), ru.truth.size());
    for (const auto& [z, v] : oracle) {
      EXPECT_EQ(ru.truth.at(z), v) << "seed " << seed << " " << z.to_string();
      v6_failures += !v[1];
    }
  }
  // The generator has to produce failures for the comparison to mean anything.
  EXPECT_GT(v6_failures, 50u);
}
