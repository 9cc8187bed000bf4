#pragma once

// Column-parallel kernels. Each kernel exists twice: a plain serial loop kept
// as the reference, and an OpenMP version that must agree with it bit for
// bit (every column is independent and reductions happen after the parallel
// region). The public operations call the OpenMP versions.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bldl/core.hpp"
#include "bldl/metrics.hpp"

namespace bldl::kernels {

// Fills `out` (length m) with a simplex point for column `col`. Must be safe
// to call concurrently for distinct columns.
using SimplexSampler = std::function<void(Eigen::Index col, std::span<double> out)>;

// Flat-Dirichlet draw for column `col` from Xoshiro256(derive_seed(seed, {col})):
// m unit exponentials scaled by their sum.
SimplexSampler flat_dirichlet_sampler(std::uint64_t seed);

// Greedy coverage degradation of one column; writes 0/1 into out.
void degrade_column(const double* d, Eigen::Index m, double threshold, double* out) noexcept;

struct SignedRankTails {
  std::uint64_t at_most = 0;   // masks with statistic <= observed
  std::uint64_t at_least = 0;  // masks with statistic >= observed
  std::uint64_t total = 0;
};

namespace serial {
Matrix mix_columns(const Matrix& D, double c, const SimplexSampler& sampler);
Matrix degrade_columns(const Matrix& D, double threshold);
std::vector<double> metric_columns(Metric name, const Matrix& truth, const Matrix& pred);
// Enumerates all 2^N sign assignments over the (doubled, hence integral)
// ranks and counts the tails around the observed doubled W+.
SignedRankTails signed_rank_tails(std::span<const std::int64_t> doubled_ranks, std::int64_t observed);
}  // namespace serial

namespace omp {
Matrix mix_columns(const Matrix& D, double c, const SimplexSampler& sampler);
Matrix degrade_columns(const Matrix& D, double threshold);
std::vector<double> metric_columns(Metric name, const Matrix& truth, const Matrix& pred);
SignedRankTails signed_rank_tails(std::span<const std::int64_t> doubled_ranks, std::int64_t observed);
}  // namespace omp

}  // namespace bldl::kernels
