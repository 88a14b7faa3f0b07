// Serial reference versus OpenMP for the data-parallel kernels. The Exec
// argument is the benchmark's range(0): 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include "phasectx/discrete_weyl.hpp"
#include "phasectx/fock.hpp"
#include "phasectx/nchv_bound.hpp"
#include "phasectx/pm_construct.hpp"

using namespace phasectx;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void BM_VertexScan(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(vertex_max_F(exec_of(s)).value);
}

void BM_ObstructionCount(benchmark::State& s) {
  const ParityPattern all_even{};
  for (auto _ : s) benchmark::DoNotOptimize(count_identity_solutions(all_even, 8, exec_of(s)));
}

void BM_FindTriples(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(find_triples(16, exec_of(s)).congruent.size());
}

void BM_PunishedSampling(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(sample_punished_max(2.0, 100000, 1, exec_of(s)).value);
}

void BM_ModeFactor(benchmark::State& s) {
  const int N = 64;
  const Cutoffs cut{N, N};
  const Eigen::MatrixXcd factor = displacement_matrix({0.7, -0.4}, N);
  Eigen::MatrixXcd cols = Eigen::MatrixXcd::Random(N * N, 4);
  for (auto _ : s) {
    apply_mode_factor(factor, static_cast<int>(s.range(1)), cut, cols, exec_of(s));
    benchmark::ClobberMemory();
  }
}

void BM_Chi(benchmark::State& s) {
  const auto t = symmetric_triple();
  const auto sq = build_cv_square(t[0], t[1], t[2]);
  const auto state = materialize(RandomState{2, 8, 1}, {48, 48});
  for (auto _ : s) benchmark::DoNotOptimize(chi_pm_expectation(sq, state, exec_of(s)).value);
}

}  // namespace

BENCHMARK(BM_VertexScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ObstructionCount)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FindTriples)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PunishedSampling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ModeFactor)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Chi)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
