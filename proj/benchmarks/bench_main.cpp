#include <benchmark/benchmark.h>

#include <random>

#include "tcov/estimators.hpp"
#include "tcov/projections.hpp"
#include "tcov/scenarios.hpp"

using namespace tcov;

namespace {

HermitianMatrix random_hermitian(Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix a(m, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) a(i, j) = Complex(g(rng), g(rng));
  }
  return HermitianMatrix::hermitian_part(a);
}

HermitianMatrix benchmark_truth(Index m) {
  RealVector w(m), p(m);
  for (Index i = 0; i < m; ++i) {
    w(i) = 6.2831853 * static_cast<double>(i) / static_cast<double>(2 * m - 1);
    p(i) = 1.0 + static_cast<double>(i % 5);
  }
  return toeplitz_from_frequencies(m, w, p) + HermitianMatrix::identity(m) * 0.1;
}

void BM_HermitianEvd(benchmark::State& state) {
  const HermitianMatrix a = random_hermitian(state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(hermitian_evd(a));
}
BENCHMARK(BM_HermitianEvd)->Arg(8)->Arg(36)->Arg(64)->Arg(256);

void BM_LmiProjection(benchmark::State& state) {
  const Index m = state.range(0);
  const DataSet d = sample_dataset(benchmark_truth(m), 2 * m, 2);
  const HermitianMatrix lower = d.reduced_constraint();
  const HermitianMatrix a = random_hermitian(m * m, 3);
  for (auto _ : state) benchmark::DoNotOptimize(project_lmi(a, lower));
}
BENCHMARK(BM_LmiProjection)->Arg(4)->Arg(6)->Arg(8);

void BM_Estimate(benchmark::State& state, InnerMode mode) {
  const Index m = state.range(0);
  const DataSet d = sample_dataset(benchmark_truth(m), 50, 4);
  EstimatorConfig cfg;
  cfg.inner_mode = mode;
  cfg.inner_tol = 1e-6;
  cfg.inner_max_iter = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(estimate(d, StructureSpec::toeplitz(), cfg));
}
BENCHMARK_CAPTURE(BM_Estimate, atom1, InnerMode::ADMM)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Estimate, atom2, InnerMode::Dykstra)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
