#include <benchmark/benchmark.h>

#include "v6ready/mock_net.hpp"
#include "v6ready/passive.hpp"

using namespace v6ready;

namespace {

void BM_FixedPoint(benchmark::State& state) {
  auto ru = random_universe(7, static_cast<std::size_t>(state.range(0)), DefectRates::mixed(0.1));
  Universe u(ru.fixture);
  auto data = ingest(export_zone_data(u));
  for (auto _ : state) benchmark::DoNotOptimize(fixed_point(data));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FixedPoint)->Arg(100)->Arg(1000)->Arg(5000);

void BM_Crawl(benchmark::State& state) {
  auto ru = random_universe(11, static_cast<std::size_t>(state.range(0)), DefectRates::mixed(0.1));
  QueryPolicy p;
  p.retry_wait = Millis{0};
  for (auto _ : state) {
    Universe u(ru.fixture);
    benchmark::DoNotOptimize(crawl_universe(u, p));
  }
}
BENCHMARK(BM_Crawl)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
