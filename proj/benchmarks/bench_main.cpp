#include <benchmark/benchmark.h>

#include <random>

#include "lsbd/block_diagonalizer.hpp"

using namespace lsbd;

namespace {

InitialData phi4_data(int n_s, int d) {
  ModelSpec spec;
  spec.n_s = n_s;
  return build_initial_data(spec, d);
}

}  // namespace

static void BM_StepSequence(benchmark::State& state) {
  const LatticeSpec lat{2, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(step_sequence(lat));
}
BENCHMARK(BM_StepSequence)->Arg(3)->Arg(5)->Arg(8);

static void BM_GSet(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Rectangle target{{n - 1, n - 1}, {1, 1}};
  const Rectangle inner{{1, 0}, {1, 1}};
  for (auto _ : state) benchmark::DoNotOptimize(g_set(inner, target));
}
BENCHMARK(BM_GSet)->Arg(3)->Arg(6);

// (m (x) 1) x on the 2x2 square for a bond operator.
static void BM_EmbeddingApplyLeft(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Rectangle bond{{1, 0}, {1, 1}};
  const Rectangle square{{1, 1}, {1, 1}};
  const Embedding e(bond, square, n);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Matrix m(e.inner_dim(), e.inner_dim()), x(e.outer_dim(), e.outer_dim());
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(e.apply_left(m, x));
}
BENCHMARK(BM_EmbeddingApplyLeft)->Arg(2)->Arg(3)->Arg(4);

static void BM_LieSchwingerBond(benchmark::State& state) {
  const InitialData data = phi4_data(static_cast<int>(state.range(0)), 1);
  const LocalOperator& w = data.pair_potentials[0];
  const LocalOperator g = h0(w.support, data.basis());
  for (auto _ : state) benchmark::DoNotOptimize(lie_schwinger_series(g, 0.0, w, 0.02, {}));
}
BENCHMARK(BM_LieSchwingerBond)->Arg(2)->Arg(4)->Arg(6);

static void BM_FullRun(benchmark::State& state) {
  const int n_s = static_cast<int>(state.range(0));
  const InitialData data = phi4_data(n_s, 2);
  RunOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(run({2, 2}, data, 0.02, opt));
}
BENCHMARK(BM_FullRun)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
