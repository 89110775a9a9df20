#include <benchmark/benchmark.h>

#include "contmodel/evaluator.hpp"
#include "contmodel/parse.hpp"
#include "contmodel/sentences.hpp"
#include "contmodel/theory.hpp"

using namespace contmodel;

// One quantifier-free body of sigma.1 per iteration.
static void BM_EvalQfSigmaBody(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Model m = make_matrix_model({{n, 1.0}});
  const Formula f = parse_formula("norm2(sub(mul(adj(y),y),I)) + abstr(y) + norm2(comm(x1,y))",
                                  Signature::TracialAlgebra, {{"x1", 1}, {"y", 1}});
  const Valuation v{{"x1", sample_domain(m, 1, std::uint64_t(1))}, {"y", sample_domain(m, 1, std::uint64_t(2))}};
  for (auto _ : state) benchmark::DoNotOptimize(eval_qf(m, f, v));
}
BENCHMARK(BM_EvalQfSigmaBody)->DenseRange(2, 6, 2);

static void BM_EvaluateCommSup(benchmark::State& state) {
  const Model m = make_matrix_model({{static_cast<int>(state.range(0)), 1.0}});
  EvalOptions o;
  o.outer_restarts = 16;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(m, comm_sup().formula, o).value);
}
BENCHMARK(BM_EvaluateCommSup)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_EvaluateSigma1(benchmark::State& state) {
  const Model m = make_matrix_model({{2, 1.0}});
  EvalOptions o;
  o.outer_restarts = 8;
  o.inner_restarts = 8;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(m, sigma(1).formula, o).value);
}
BENCHMARK(BM_EvaluateSigma1)->Unit(benchmark::kMillisecond);

static void BM_EvaluatePsi(benchmark::State& state) {
  const Model m = square_family(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(m, psi().formula, {}).value);
}
BENCHMARK(BM_EvaluatePsi)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
