#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fecg/fpu.hpp"

using fecg::fpu::F32Bits;

namespace {

std::vector<F32Bits> operands(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::vector<F32Bits> v(n);
  for (auto& x : v) x = F32Bits::from_double(u(rng));
  return v;
}

template <class Op>
void run(benchmark::State& state, Op op) {
  const auto v = operands(4096);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(op(v[i & 4095], v[(i + 1) & 4095]));
    ++i;
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_Add(benchmark::State& s) { run(s, [](F32Bits a, F32Bits b) { return fecg::fpu::add(a, b); }); }
void BM_Mul(benchmark::State& s) { run(s, [](F32Bits a, F32Bits b) { return fecg::fpu::mul(a, b); }); }
void BM_Cmp(benchmark::State& s) {
  run(s, [](F32Bits a, F32Bits b) { return fecg::fpu::compare(a, b); });
}

}  // namespace

BENCHMARK(BM_Add);
BENCHMARK(BM_Mul);
BENCHMARK(BM_Cmp);
