#include <benchmark/benchmark.h>

#include "v6ready/message.hpp"

using namespace v6ready;

namespace {

DnsMessage referral() {
  auto q = DnsMessage::make_query(DomainName::parse("www.example.org"), rrtype::A, rrclass::IN, 4711);
  auto r = DnsMessage::make_response(q);
  for (int i = 1; i <= 4; ++i) {
    auto ns = DomainName::parse("ns" + std::to_string(i) + ".example.org");
    r.authority.push_back(ResourceRecord::ns(DomainName::parse("example.org"), ns));
    r.additional.push_back(ResourceRecord::address(ns, *IpAddress::parse("192.0.2." + std::to_string(i))));
    r.additional.push_back(ResourceRecord::address(ns, *IpAddress::parse("2001:db8::" + std::to_string(i))));
  }
  return r;
}

void BM_Encode(benchmark::State& state) {
  auto m = referral();
  for (auto _ : state) benchmark::DoNotOptimize(encode(m));
}
BENCHMARK(BM_Encode);

void BM_Decode(benchmark::State& state) {
  auto bytes = encode(referral());
  for (auto _ : state) benchmark::DoNotOptimize(decode(bytes));
}
BENCHMARK(BM_Decode);

}  // namespace
