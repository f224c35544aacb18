#include <benchmark/benchmark.h>
#include <omp.h>

#include "lqg/gmc.hpp"
#include "lqg/harness.hpp"
#include "lqg/perc.hpp"

namespace {

using namespace lqg;

void BM_FourArmSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = perc::sample_config(n, perc::Shape::box, 7);
  for (auto _ : state) benchmark::DoNotOptimize(perc::four_arm_sites(c, 3));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

void BM_FourArmOpenMP(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = perc::sample_config(n, perc::Shape::box, 7);
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(perc::four_arm_sites_parallel(c, 3));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

void BM_ArmTrials(benchmark::State& state) {
  harness::ExperimentSpec spec;
  spec.subcommand = "perc";
  spec.verb = "area";
  spec.trials = 64;
  spec.threads = static_cast<int>(state.range(0));
  spec.params.set("radii", std::string_view("[8, 16, 32]"));
  for (auto _ : state) benchmark::DoNotOptimize(harness::run_experiment(spec));
}

void BM_SampleGff(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(gmc::sample_gff(n, seed++));
}

}  // namespace

BENCHMARK(BM_FourArmSerial)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FourArmOpenMP)->ArgsProduct({{32, 64, 128}, {1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ArmTrials)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SampleGff)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
