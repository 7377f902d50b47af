#include <benchmark/benchmark.h>

#include <vector>

#include <moldsched/bench/chain.hpp>
#include <moldsched/bench/kernels.hpp>
#include <moldsched/executor.hpp>
#include <moldsched/perf_model.hpp>
#include <moldsched/queues.hpp>
#include <moldsched/sta.hpp>

namespace {

using namespace moldsched;

void BM_StealingQueuePushPop(benchmark::State& state) {
  StealingQueue q;
  std::vector<Task*> fake(64, nullptr);
  for (auto _ : state) {
    for (auto* t : fake) q.push(t);
    for (std::size_t i = 0; i < fake.size(); ++i) benchmark::DoNotOptimize(q.pop());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_StealingQueuePushPop);

void BM_MortonEncode2D(benchmark::State& state) {
  const int bits = max_bits(static_cast<int>(state.range(0)));
  double x = 0.0;
  for (auto _ : state) {
    x = x + 0.618034 >= 1.0 ? x - 0.381966 : x + 0.618034;
    benchmark::DoNotOptimize(sfo_encode(CartesianLocation{{x, 1.0 - x}}, bits));
  }
}
BENCHMARK(BM_MortonEncode2D)->Arg(8)->Arg(64);

void BM_GlobalMinPartition(benchmark::State& state) {
  const auto layout = Layout::power_of_two(static_cast<int>(state.range(0)),
                                           static_cast<int>(state.range(0)));
  PerfModel model(layout, max_bits(layout.worker_count()));
  model.ensure_types(1);
  double c = 1.0;
  for (const auto& p : layout.all_partitions()) model.record({0, 3}, p, c += 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(model.global_min_partition({0, 3}));
}
BENCHMARK(BM_GlobalMinPartition)->Arg(8)->Arg(32);

void BM_NbodyKernel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> src(n), dst(n);
  for (std::size_t i = 0; i < n; ++i) src[i] = dst[i] = static_cast<double>(i) / static_cast<double>(n);
  for (auto _ : state) {
    bench::nbody_task(dst, src, 1e-6, 0, 1);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}
BENCHMARK(BM_NbodyKernel)->Arg(256)->Arg(1024);

void BM_ChainVirtual(benchmark::State& state) {
  for (auto _ : state) {
    Runtime rt(Layout::power_of_two(8, 8));
    bench::ChainSpec spec{static_cast<int>(state.range(0)), 64, bench::ChainKind::kCopy, 16};
    bench::ChainWorkload w(spec, bench::BuildContext::from(rt));
    VirtualExecutor ex(rt, analytic_durations({}), false);
    benchmark::DoNotOptimize(ex.run(w.dag()));
  }
}
BENCHMARK(BM_ChainVirtual)->Arg(2)->Arg(16);

void BM_ChainThreaded(benchmark::State& state) {
  for (auto _ : state) {
    Runtime rt(Layout::power_of_two(4, 4));
    bench::ChainSpec spec{static_cast<int>(state.range(0)), 64, bench::ChainKind::kTriad, 4096};
    bench::ChainWorkload w(spec, bench::BuildContext::from(rt));
    ThreadedExecutor ex(rt, {.pin = false});
    benchmark::DoNotOptimize(ex.run(w.dag()));
  }
}
BENCHMARK(BM_ChainThreaded)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
