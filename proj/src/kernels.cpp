#include "bldl/kernels.hpp"

#include <algorithm>
#include <numeric>

#include "bldl/rng.hpp"

namespace bldl::kernels {

SimplexSampler flat_dirichlet_sampler(std::uint64_t seed) {
  return [seed](Eigen::Index col, std::span<double> out) {
    Xoshiro256 rng(derive_seed(seed, {static_cast<std::uint64_t>(col)}));
    double sum = 0.0;
    for (double& v : out) {
      v = rng.exponential();
      sum += v;
    }
    for (double& v : out) v /= sum;
  };
}

void degrade_column(const double* d, Eigen::Index m, double threshold, double* out) noexcept {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  // Descending by degree, lowest index first among equals.
  std::stable_sort(order.begin(), order.end(), [d](Eigen::Index a, Eigen::Index b) { return d[a] > d[b]; });
  std::fill(out, out + m, 0.0);
  double covered = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    out[order[static_cast<std::size_t>(k)]] = 1.0;
    covered += d[order[static_cast<std::size_t>(k)]];
    if (covered > threshold) break;
  }
}

namespace {

inline void mix_one(const Matrix& D, double c, const SimplexSampler& sampler, Eigen::Index j, Matrix& out) {
  const Eigen::Index m = D.rows();
  std::vector<double> u(static_cast<std::size_t>(m));
  sampler(j, u);
  for (Eigen::Index i = 0; i < m; ++i) out(i, j) = (1.0 - c) * D(i, j) + c * u[static_cast<std::size_t>(i)];
}

inline std::int64_t mask_sum(std::span<const std::int64_t> ranks, std::uint64_t mask) noexcept {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (mask >> i & 1U) s += ranks[i];
  return s;
}

}  // namespace

namespace serial {

Matrix mix_columns(const Matrix& D, double c, const SimplexSampler& sampler) {
  Matrix out(D.rows(), D.cols());
  for (Eigen::Index j = 0; j < D.cols(); ++j) mix_one(D, c, sampler, j, out);
  return out;
}

Matrix degrade_columns(const Matrix& D, double threshold) {
  Matrix out(D.rows(), D.cols());
  for (Eigen::Index j = 0; j < D.cols(); ++j) degrade_column(D.col(j).data(), D.rows(), threshold, out.col(j).data());
  return out;
}

std::vector<double> metric_columns(Metric name, const Matrix& truth, const Matrix& pred) {
  std::vector<double> values(static_cast<std::size_t>(truth.cols()));
  for (Eigen::Index j = 0; j < truth.cols(); ++j)
    values[static_cast<std::size_t>(j)] = metric_value(name, truth.col(j).data(), pred.col(j).data(), truth.rows());
  return values;
}

SignedRankTails signed_rank_tails(std::span<const std::int64_t> doubled_ranks, std::int64_t observed) {
  SignedRankTails t;
  t.total = std::uint64_t{1} << doubled_ranks.size();
  for (std::uint64_t mask = 0; mask < t.total; ++mask) {
    const std::int64_t s = mask_sum(doubled_ranks, mask);
    t.at_most += s <= observed;
    t.at_least += s >= observed;
  }
  return t;
}

}  // namespace serial

namespace omp {

Matrix mix_columns(const Matrix& D, double c, const SimplexSampler& sampler) {
  Matrix out(D.rows(), D.cols());
  const Eigen::Index n = D.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j) mix_one(D, c, sampler, j, out);
  return out;
}

Matrix degrade_columns(const Matrix& D, double threshold) {
  Matrix out(D.rows(), D.cols());
  const Eigen::Index n = D.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j) degrade_column(D.col(j).data(), D.rows(), threshold, out.col(j).data());
  return out;
}

std::vector<double> metric_columns(Metric name, const Matrix& truth, const Matrix& pred) {
  std::vector<double> values(static_cast<std::size_t>(truth.cols()));
  const Eigen::Index n = truth.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j)
    values[static_cast<std::size_t>(j)] = metric_value(name, truth.col(j).data(), pred.col(j).data(), truth.rows());
  return values;
}

SignedRankTails signed_rank_tails(std::span<const std::int64_t> doubled_ranks, std::int64_t observed) {
  SignedRankTails t;
  t.total = std::uint64_t{1} << doubled_ranks.size();
  const std::uint64_t total = t.total;
  std::uint64_t at_most = 0, at_least = 0;
#pragma omp parallel for schedule(static) reduction(+ : at_most, at_least)
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    const std::int64_t s = mask_sum(doubled_ranks, mask);
    at_most += s <= observed;
    at_least += s >= observed;
  }
  t.at_most = at_most;
  t.at_least = at_least;
  return t;
}

}  // namespace omp

}  // namespace bldl::kernels
