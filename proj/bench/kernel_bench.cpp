// Serial reference kernels against their OpenMP versions.
//   ./tshm_kernel_bench --benchmark_counters_tabular=true
#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "tshm/kernels.hpp"
#include "tshm/partition_view.hpp"
#include "tshm/synthetic.hpp"

namespace {

using namespace tshm;

struct Fixture {
  CooTensor t;
  PartitionPlan plan;
  InMemoryPartitions parts;
  std::vector<FactorMatrix> factors;

  Fixture(Index n, std::size_t rank)
      : t(gen_synthetic({.dims = {n, n, n}, .rank = 3, .density = 0.01, .seed = 1})),
        plan(build_plan(t, 8)),
        parts(t, plan) {
    for (Index d : t.dims) {
      FactorMatrix f(d, rank);
      for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = 1.0 / (1.0 + static_cast<double>(i % 17));
      factors.push_back(std::move(f));
    }
  }
};

const Fixture& fixture(Index n) {
  static Fixture f64(64, 16), f128(128, 16), f256(256, 16);
  return n == 64 ? f64 : n == 128 ? f128 : f256;
}

void threads_from(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(1)));
}

void BM_MttkrpSerial(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::mttkrp_serial(f.parts.views(), f.factors, 0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.t.nnz()));
}

void BM_MttkrpParallel(benchmark::State& state) {
  threads_from(state);
  const auto& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::mttkrp_parallel(f.parts.views(), f.factors, 0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.t.nnz()));
}

void BM_AssignSerial(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  std::vector<std::uint32_t> out(f.t.nnz());
  for (auto _ : state) {
    kernels::assign_serial(f.plan, f.t, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.t.nnz()));
}

void BM_AssignParallel(benchmark::State& state) {
  threads_from(state);
  const auto& f = fixture(state.range(0));
  std::vector<std::uint32_t> out(f.t.nnz());
  for (auto _ : state) {
    kernels::assign_parallel(f.plan, f.t, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.t.nnz()));
}

void sizes(benchmark::internal::Benchmark* b) {
  for (long n : {64, 128, 256}) b->Args({n});
}

void sizes_and_threads(benchmark::internal::Benchmark* b) {
  const long max_threads = omp_get_num_procs();
  for (long n : {64, 128, 256})
    for (long t = 1; t <= max_threads; t *= 2) b->Args({n, t});
}

}  // namespace

BENCHMARK(BM_MttkrpSerial)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MttkrpParallel)->Apply(sizes_and_threads)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_AssignSerial)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_AssignParallel)->Apply(sizes_and_threads)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
