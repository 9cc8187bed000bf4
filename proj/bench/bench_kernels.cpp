// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "bldl/kernels.hpp"
#include "bldl/rng.hpp"

using namespace bldl;

namespace {

Matrix simplex_columns(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  Matrix out(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) out(i, j) = rng.exponential();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

std::vector<std::int64_t> doubled_ranks(int n) {
  std::vector<std::int64_t> r(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = 2 * (i + 1);
  return r;
}

template <Matrix (*Mix)(const Matrix&, double, const kernels::SimplexSampler&)>
void BM_mix(benchmark::State& state) {
  const Matrix d = simplex_columns(16, state.range(0), 1);
  const auto sampler = kernels::flat_dirichlet_sampler(2);
  for (auto _ : state) benchmark::DoNotOptimize(Mix(d, 0.2, sampler));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Matrix (*Degrade)(const Matrix&, double)>
void BM_degrade(benchmark::State& state) {
  const Matrix d = simplex_columns(16, state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(Degrade(d, 0.7));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <std::vector<double> (*Metrics)(Metric, const Matrix&, const Matrix&)>
void BM_metrics(benchmark::State& state) {
  const Matrix a = simplex_columns(16, state.range(0), 4);
  const Matrix b = simplex_columns(16, state.range(0), 5);
  for (auto _ : state)
    for (Metric m : kAllMetrics) benchmark::DoNotOptimize(Metrics(m, a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 6);
}

template <kernels::SignedRankTails (*Tails)(std::span<const std::int64_t>, std::int64_t)>
void BM_signed_rank(benchmark::State& state) {
  const auto r = doubled_ranks(static_cast<int>(state.range(0)));
  const std::int64_t observed = static_cast<std::int64_t>(state.range(0)) * 8;
  for (auto _ : state) benchmark::DoNotOptimize(Tails(r, observed));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_mix, kernels::serial::mix_columns)->Name("mix_columns/serial")->Range(1 << 10, 1 << 16);
BENCHMARK_TEMPLATE(BM_mix, kernels::omp::mix_columns)->Name("mix_columns/omp")->Range(1 << 10, 1 << 16);
BENCHMARK_TEMPLATE(BM_degrade, kernels::serial::degrade_columns)->Name("degrade_columns/serial")->Range(1 << 10, 1 << 16);
BENCHMARK_TEMPLATE(BM_degrade, kernels::omp::degrade_columns)->Name("degrade_columns/omp")->Range(1 << 10, 1 << 16);
BENCHMARK_TEMPLATE(BM_metrics, kernels::serial::metric_columns)->Name("metric_columns/serial")->Range(1 << 10, 1 << 16);
BENCHMARK_TEMPLATE(BM_metrics, kernels::omp::metric_columns)->Name("metric_columns/omp")->Range(1 << 10, 1 << 16);
BENCHMARK_TEMPLATE(BM_signed_rank, kernels::serial::signed_rank_tails)->Name("signed_rank_tails/serial")->DenseRange(12, 20, 4);
BENCHMARK_TEMPLATE(BM_signed_rank, kernels::omp::signed_rank_tails)->Name("signed_rank_tails/omp")->DenseRange(12, 20, 4);

BENCHMARK_MAIN();
