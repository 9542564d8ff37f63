#include <benchmark/benchmark.h>

#include "fishing/experiment.hpp"
#include "fishing/filter.hpp"
#include "fishing/simulator.hpp"

namespace {

using namespace fishing;

struct TrialLog {
  std::vector<ProbeEvent> probes;
  std::vector<StayingInterval> intervals;
};

const TrialLog& trial_log() {
  static const TrialLog log = [] {
    const auto scenario = experiment::make_experiment_scenario(0, {});
    auto out = sim::run_scenario(scenario);
    return TrialLog{std::move(out.probes), experiment::operator_intervals(scenario, out.truth)};
  }();
  return log;
}

void BM_RunFilter(benchmark::State& state) {
  const auto& log = trial_log();
  for (auto _ : state) benchmark::DoNotOptimize(filter::run_filter(log.probes, log.intervals, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(log.probes.size()));
}
BENCHMARK(BM_RunFilter);

void BM_PerApRates(benchmark::State& state) {
  const auto& log = trial_log();
  const auto& staying = log.intervals.front();
  std::vector<ProbeEvent> events;
  for (const auto& e : log.probes) {
    if (e.ap_id == staying.ap_id) events.push_back(e);
  }
  for (auto _ : state) benchmark::DoNotOptimize(filter::per_ap_suspicious_rates(events, staying, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_PerApRates);

// Synthetic AP log with `range(0)` MACs, each probing every 5 s for an hour.
void BM_PerApRatesScaling(benchmark::State& state) {
  std::vector<ProbeEvent> events;
  const auto macs = state.range(0);
  for (std::int64_t m = 0; m < macs; ++m) {
    for (int t = 0; t < 3600; t += 5) {
      events.push_back({t + 0.01 * static_cast<double>(m % 100), "ap1",
                        MacAddress::from_u64(0x020000000000ULL + static_cast<std::uint64_t>(m)), -60, std::nullopt});
    }
  }
  const StayingInterval staying{"ap1", 1800, 1860};
  for (auto _ : state) benchmark::DoNotOptimize(filter::per_ap_suspicious_rates(events, staying, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_PerApRatesScaling)->Arg(10)->Arg(100)->Arg(1000);

}  // namespace
