#include <random>
#include <thread>

#include <benchmark/benchmark.h>

#include "silt/experiment_config.hpp"
#include "silt/fwt_regularization.hpp"
#include "silt/integrator_process.hpp"
#include "silt/silt_estimators.hpp"

namespace {

using namespace silt;

const Exec kExec{static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};

void BM_GramDet(benchmark::State& state) {
  const GridContext ctx(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<GridFunction> fs;
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd v(ctx.n());
    for (auto& x : v) x = g(rng);
    fs.emplace_back(ctx, v);
  }
  for (auto _ : state) benchmark::DoNotOptimize(gram_det(fs).value);
}
BENCHMARK(BM_GramDet)->Arg(64)->Arg(512);

void BM_SimplexRule(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(build_simplex_rule(n, k, 0.1).size());
}
BENCHMARK(BM_SimplexRule)->Args({128, 2})->Args({64, 3})->Unit(benchmark::kMillisecond);

void BM_InverseGramLevel(benchmark::State& state) {
  const OperatorMatrix op = build_operator(default_config().op, GridContext(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(theorem3_integral(op, 3, 0.1, kExec).value);
}
BENCHMARK(BM_InverseGramLevel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SamplePaths(benchmark::State& state) {
  const OperatorMatrix op = build_operator(FbmVolterraSpec{0.75}, GridContext(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(sample_paths(op, 1, 1000, kExec).size());
}
BENCHMARK(BM_SamplePaths)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SecondMomentTable(benchmark::State& state) {
  const OperatorMatrix op = build_operator(IdentitySpec{}, GridContext(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(second_moment_table(op, {0.2, 0.1, 0.05, 0.025}, 2, 0.2, {false, kExec}).sum());
  }
}
BENCHMARK(BM_SecondMomentTable)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
