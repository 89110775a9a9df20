#include <benchmark/benchmark.h>

#include "contmodel/models.hpp"

using namespace contmodel;

static void BM_ProjectDomain(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Model m = make_matrix_model({{n, 1.0}});
  const Element x = sample_domain(m, 2, std::uint64_t(1));
  for (auto _ : state) benchmark::DoNotOptimize(project_domain(m, x, 1));
}
BENCHMARK(BM_ProjectDomain)->DenseRange(2, 8, 2);

static void BM_Moments(benchmark::State& state) {
  const MatrixModel m = make_matrix_model({{4, 1.0}});
  const std::vector<Element> tuple{sample_domain(Model(m), 1, std::uint64_t(2)),
                                   sample_domain(Model(m), 1, std::uint64_t(3))};
  const int degree = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(moments(m, tuple, degree));
}
BENCHMARK(BM_Moments)->DenseRange(1, 4);

static void BM_BValueSearch(benchmark::State& state) {
  const MatrixModel m = make_matrix_model({{1, 0.6}, {2, 0.4}});
  for (auto _ : state) benchmark::DoNotOptimize(b_value_search(m, 8, 0));
}
BENCHMARK(BM_BValueSearch)->Unit(benchmark::kMillisecond);
