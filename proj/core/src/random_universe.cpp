#include <algorithm>
#include <random>

#include "v6ready/mock_net.hpp"

namespace v6ready {

DefectRates DefectRates::none() {
  DefectRates r;
  r.oob_ns = 0.0;
  r.missing_v6 = 0.0;
  r.missing_v4 = 0.0;
  return r;
}

DefectRates DefectRates::mixed(double rate) {
  DefectRates r;
  r.drop_aaaa_glue = rate;
  r.drop_aaaa_apex = rate;
  r.truncate_udp = rate;
  r.formerr_on_edns = rate;
  r.wrong_ns_set_child = rate;
  return r;
}

namespace {

IpAddress nth_v4(std::uint32_t k) {
  return IpAddress::v4({10, static_cast<std::uint8_t>(k >> 16), static_cast<std::uint8_t>(k >> 8),
                        static_cast<std::uint8_t>(k)});
}

IpAddress nth_v6(std::uint32_t k) {
  std::array<std::uint8_t, 16> b{};
  b[0] = 0xfd;
  b[12] = static_cast<std::uint8_t>(k >> 24);
  b[13] = static_cast<std::uint8_t>(k >> 16);
  b[14] = static_cast<std::uint8_t>(k >> 8);
  b[15] = static_cast<std::uint8_t>(k);
  return IpAddress::v6(b);
}

struct Slot {
  std::size_t zone;
  bool oob;
};

}  // namespace

RandomUniverse random_universe(std::uint64_t seed, std::size_t size, const DefectRates& rates) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  auto chance = [&](double p) { return p > 0.0 && coin(rng) < p; };

  Fixture fx;
  {
    FixtureZone root;
    root.zone = DomainName::root();
    for (std::uint32_t k = 1; k <= 2; ++k) {
      FixtureNs ns;
      ns.name = DomainName::parse(k == 1 ? "a.root" : "b.root");
      ns.addresses = {nth_v4(k), nth_v6(k)};
      root.ns.push_back(std::move(ns));
    }
    fx.zones.push_back(std::move(root));
  }

  for (std::size_t i = 0; i < size; ++i) {
    std::vector<std::size_t> parents;
    for (std::size_t p = 0; p < fx.zones.size(); ++p)
      if (fx.zones[p].zone.label_count() < 4) parents.push_back(p);
    std::size_t p = parents[std::uniform_int_distribution<std::size_t>(0, parents.size() - 1)(rng)];
    FixtureZone z;
    z.zone = fx.zones[p].zone.child("z" + std::to_string(i));
    fx.zones.push_back(std::move(z));
  }

  // First pass: in-bailiwick hosts; out-of-bailiwick slots are filled later.
  std::uint32_t next_addr = 16;
  std::vector<Slot> oob_slots;
  for (std::size_t i = 1; i < fx.zones.size(); ++i) {
    auto& z = fx.zones[i];
    int slots = 1 + static_cast<int>(rng() % 3);
    for (int s = 0; s < slots; ++s) {
      if (chance(rates.oob_ns)) {
        oob_slots.push_back({i, true});
        continue;
      }
      FixtureNs ns;
      ns.name = z.zone.child("ns" + std::to_string(s + 1));
      std::uint32_t k = next_addr++;
      if (!chance(rates.missing_v4)) ns.addresses.push_back(nth_v4(k));
      if (!chance(rates.missing_v6)) ns.addresses.push_back(nth_v6(k));
      z.ns.push_back(std::move(ns));
    }
  }

  // Hosts available for reuse, and the zones each one already serves.
  std::map<DomainName, std::pair<std::vector<IpAddress>, std::set<DomainName>>> pool;
  for (std::size_t i = 1; i < fx.zones.size(); ++i)
    for (const auto& ns : fx.zones[i].ns) pool[ns.name] = {ns.addresses, {fx.zones[i].zone}};

  auto related = [](const DomainName& a, const DomainName& b) {
    return is_in_bailiwick(a, b) || is_in_bailiwick(b, a);
  };

  for (const auto& slot : oob_slots) {
    auto& z = fx.zones[slot.zone];
    std::vector<DomainName> candidates;
    for (const auto& [name, entry] : pool) {
      if (is_in_bailiwick(name, z.zone)) continue;
      if (std::any_of(z.ns.begin(), z.ns.end(), [&](const FixtureNs& n) { return n.name == name; })) continue;
      if (std::any_of(entry.second.begin(), entry.second.end(),
                      [&](const DomainName& served) { return related(served, z.zone); }))
        continue;
      candidates.push_back(name);
    }
    FixtureNs ns;
    if (candidates.empty()) {
      ns.name = z.zone.child("ns" + std::to_string(z.ns.size() + 1) + "x");
      std::uint32_t k = next_addr++;
      ns.addresses = {nth_v4(k), nth_v6(k)};
    } else {
      ns.name = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
      ns.addresses = pool[ns.name].first;
      pool[ns.name].second.insert(z.zone);
    }
    z.ns.push_back(std::move(ns));
  }

  for (std::size_t i = 1; i < fx.zones.size(); ++i) {
    auto& z = fx.zones[i];
    auto maybe = [&](Defect d, double p) {
      if (chance(p)) z.defects.insert(d);
    };
    maybe(Defect::drop_aaaa_glue, rates.drop_aaaa_glue);
    maybe(Defect::drop_aaaa_apex, rates.drop_aaaa_apex);
    maybe(Defect::truncate_udp, rates.truncate_udp);
    maybe(Defect::formerr_on_edns, rates.formerr_on_edns);
    maybe(Defect::blackhole_v6, rates.blackhole_v6);
    maybe(Defect::blackhole_all, rates.blackhole_all);
    if (z.ns.size() >= 2) maybe(Defect::wrong_ns_set_child, rates.wrong_ns_set_child);
  }

  RandomUniverse out;
  out.truth = enumerate_ground_truth(Universe(fx));
  out.fixture = std::move(fx);
  return out;
}

}  // namespace v6ready
