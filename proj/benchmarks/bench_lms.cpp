#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fecg/lms.hpp"

using namespace fecg::lms;
using fecg::fpu::F32Bits;

namespace {

void BM_Datapath(benchmark::State& state, Architecture arch) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<F32Bits> x(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = F32Bits::from_double(u(rng));
    d[i] = F32Bits::from_double(u(rng));
  }
  LmsConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(run_datapath(arch, cfg, x, d));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Datapath, series, Architecture::series)->Arg(30'000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Datapath, parallel, Architecture::parallel)->Arg(30'000)->Unit(benchmark::kMillisecond);
