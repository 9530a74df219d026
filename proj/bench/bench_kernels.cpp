// Serial reference kernels against their OpenMP versions, plus one full
// DIMPA aggregation, on a DSBM graph.

#include <map>

#include <benchmark/benchmark.h>

#include "digrac/dsbm.hpp"
#include "digrac/kernels.hpp"
#include "digrac/model.hpp"

namespace {

using namespace digrac;

const SparseDigraph& graph(Index n) {
  static std::map<Index, SparseDigraph> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    DsbmSpec spec;
    spec.meta = build_meta_graph(MetaStructure::cycle, 3, 0.1, false);
    spec.nodes = n;
    spec.p = 20.0 / static_cast<double>(n);
    spec.seed = 1;
    it = cache.emplace(n, sample_dsbm(spec).graph).first;
  }
  return it->second;
}

void BM_spmm_serial(benchmark::State& state) {
  const auto& g = graph(state.range(0));
  const Matrix x = Matrix::Random(g.num_nodes(), 32);
  Matrix y(g.num_nodes(), 32);
  for (auto _ : state) {
    kernels::serial::spmm(g.out(), x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * g.num_edges() * 32);
}

void BM_spmm_omp(benchmark::State& state) {
  const auto& g = graph(state.range(0));
  const Matrix x = Matrix::Random(g.num_nodes(), 32);
  Matrix y(g.num_nodes(), 32);
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    kernels::omp::spmm(g.out(), x, y, threads);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * g.num_edges() * 32);
}

void BM_gram_serial(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix p = Matrix::Random(n, 5), q = Matrix::Random(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::gram(p, q));
}

void BM_gram_omp(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix p = Matrix::Random(n, 5), q = Matrix::Random(n, 5);
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::gram(p, q, threads));
}

void BM_dimpa_aggregate(benchmark::State& state) {
  const auto& g = graph(state.range(0));
  kernels::set_threads(static_cast<int>(state.range(1)));
  const PropagationMatrix prop(g, 0.5, Direction::source);
  const Matrix h = Matrix::Random(g.num_nodes(), 32);
  const std::vector<double> omega = {1.0, 1.0, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(dimpa_aggregate(prop, h, omega));
  kernels::set_threads(1);
}

}  // namespace

BENCHMARK(BM_spmm_serial)->Arg(10000)->Arg(100000);
BENCHMARK(BM_spmm_omp)->ArgsProduct({{10000, 100000}, {1, 2, 4}});
BENCHMARK(BM_gram_serial)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_gram_omp)->ArgsProduct({{100000, 1000000}, {1, 2, 4}});
BENCHMARK(BM_dimpa_aggregate)->ArgsProduct({{10000, 100000}, {1, 2, 4}});

BENCHMARK_MAIN();
