#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "mcnet/invlaplace.hpp"
#include "mcnet/kernels.hpp"
#include "mcnet/moments.hpp"
#include "mcnet/stochsim.hpp"
#include "mcnet/xfer.hpp"

using namespace mcnet;

namespace {

NetworkSpec link(int clearance) {
  NetworkSpec spec;
  spec.lattice = {0.01, {1, 1, 1}, 0.05};
  spec.transmitters.push_back({{{0, 0, 0}}, {{{0.0, 2000}}, {}, CountModel::deterministic}});
  spec.receivers.push_back({{{3, 0, 0}}, 2.5e-3, 0.05, LinearKinetics{}});
  spec.horizon = 0.1;
  return withClearance(spec, clearance);
}

std::vector<double> grid(double stop, int n) {
  std::vector<double> g;
  for (int m = 0; m <= n; ++m) g.push_back(stop * m / n);
  return g;
}

void BM_TauLeap(benchmark::State& state) {
  const auto spec = link(static_cast<int>(state.range(0)));
  const auto g = grid(0.1, 10);
  TauOptions opts;
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulateTau(spec, opts, seed++, g));
  state.counters["voxels"] = static_cast<double>(spec.lattice.voxelCount());
  state.counters["steps/s"] = benchmark::Counter(1000.0 * static_cast<double>(state.iterations()), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_TauLeap)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_MeanOde(benchmark::State& state) {
  const auto spec = link(static_cast<int>(state.range(0)));
  const auto g = grid(0.1, 10);
  for (auto _ : state) benchmark::DoNotOptimize(meanOde(spec, g));
  state.counters["voxels"] = static_cast<double>(spec.lattice.voxelCount());
}
BENCHMARK(BM_MeanOde)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_FreeKernel(benchmark::State& state) {
  PsiOptions po;
  po.nodes = static_cast<int>(state.range(0));
  po.strict = false;
  const FreeLatticeKernel kernel(0.05, 0.01, po);
  const Voxel offsets[] = {{0, 0, 0}, {3, 0, 0}, {2, 2, 1}};
  for (auto _ : state) benchmark::DoNotOptimize(kernel.evaluate(Complex(5.0, 20.0), offsets));
}
BENCHMARK(BM_FreeKernel)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_BoxKernel(benchmark::State& state) {
  const LatticeSpec lat{0.01, {20, 17, 17}, 0.05};
  const BoxLatticeKernel box(lat);
  for (auto _ : state) benchmark::DoNotOptimize(box({11, 8, 8}, {8, 8, 8}, Complex(5.0, 20.0)));
}
BENCHMARK(BM_BoxKernel)->Unit(benchmark::kMicrosecond);

void BM_Talbot(benchmark::State& state) {
  const Evaluator f = [](Complex s) { return std::exp(-std::sqrt(s)) / s; };
  const auto times = grid(2.0, 200);
  const std::vector<double> positive(times.begin() + 1, times.end());
  TalbotOptions opts;
  opts.nodes = static_cast<int>(state.range(0));
  opts.enforce = false;
  for (auto _ : state) benchmark::DoNotOptimize(invert(f, positive, opts));
}
BENCHMARK(BM_Talbot)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_TransferSeries(benchmark::State& state) {
  const auto spec = link(8);
  const auto g = grid(0.1, 20);
  for (auto _ : state) benchmark::DoNotOptimize(receiverOutputTimeSeries(spec, KernelConfig{}, g));
}
BENCHMARK(BM_TransferSeries)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
