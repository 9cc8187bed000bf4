#include "bldl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "bldl/kernels.hpp"

namespace bldl {

std::vector<double> average_ranks(const std::vector<double>& values, bool lower_is_better) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lower_is_better ? values[a] < values[b] : values[a] > values[b];
  });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

RankTable RankTable::from_scores(const Matrix& scores, std::vector<std::string> method_names, bool lower_is_better) {
  if (static_cast<Eigen::Index>(method_names.size()) != scores.cols())
    throw ShapeMismatch("rank table: method name count differs from score columns");
  RankTable t{Matrix(scores.rows(), scores.cols()), std::move(method_names)};
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(scores.cols()));
    for (Eigen::Index j = 0; j < scores.cols(); ++j) row[static_cast<std::size_t>(j)] = scores(i, j);
    const auto r = average_ranks(row, lower_is_better);
    for (Eigen::Index j = 0; j < scores.cols(); ++j) t.ranks(i, j) = r[static_cast<std::size_t>(j)];
  }
  return t;
}

void RankTable::validate() const {
  const double k = static_cast<double>(ranks.cols());
  for (Eigen::Index i = 0; i < ranks.rows(); ++i)
    if (std::abs(ranks.row(i).sum() - k * (k + 1.0) / 2.0) > 1e-9)
      throw InvalidConfig("rank table row " + std::to_string(i) + " does not sum to k(k+1)/2");
}

FriedmanResult friedman(const RankTable& table) {
  const auto N = table.ranks.rows();
  const auto k = table.ranks.cols();
  if (N < 2 || k < 2) throw ShapeMismatch("friedman: need at least 2 datasets and 2 methods");
  table.validate();
  FriedmanResult r;
  const double n = static_cast<double>(N), kk = static_cast<double>(k);
  const Vector mean = table.ranks.colwise().mean().transpose();
  r.mean_ranks.assign(mean.data(), mean.data() + mean.size());
  r.chi2 = 12.0 * n / (kk * (kk + 1.0)) * (mean.squaredNorm() - kk * (kk + 1.0) * (kk + 1.0) / 4.0);
  r.df1 = static_cast<int>(k - 1);
  r.df2 = static_cast<int>((k - 1) * (N - 1));
  const double denom = n * (kk - 1.0) - r.chi2;
  if (std::abs(denom) <= 1e-12 * n * kk) {
    r.degenerate = true;
    r.f_stat = std::numeric_limits<double>::infinity();
  } else {
    r.f_stat = (n - 1.0) * r.chi2 / denom;
  }
  return r;
}

double f_survival(double x, double df1, double df2) {
  if (x <= 0.0) return 1.0;
  // P(F > x) = I_{df2 / (df2 + df1 x)}(df2 / 2, df1 / 2)
  const double z = df2 / (df2 + df1 * x);
  return boost::math::ibeta(df2 / 2.0, df1 / 2.0, z);
}

double f_critical(double alpha, double df1, double df2) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidConfig("f_critical: alpha must lie in (0, 1)");
  if (!(df1 > 0.0 && df2 > 0.0)) throw InvalidConfig("f_critical: degrees of freedom must be positive");
  double lo = 0.0, hi = 1.0;
  while (f_survival(hi, df1, df2) > alpha) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (f_survival(mid, df1, df2) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double bonferroni_dunn_cd(int k, int n_datasets, double q_alpha) {
  if (k < 2 || n_datasets < 1 || !(q_alpha > 0.0)) throw InvalidConfig("bonferroni_dunn_cd: invalid arguments");
  return q_alpha * std::sqrt(static_cast<double>(k) * (k + 1) / (6.0 * n_datasets));
}

std::optional<double> bonferroni_dunn_q(int k, double alpha) {
  // Two-tailed Bonferroni-Dunn critical values, k = 2..10 (Demsar 2006, Table 5b).
  static constexpr double q05[] = {1.960, 2.241, 2.394, 2.498, 2.576, 2.638, 2.690, 2.724, 2.773};
  static constexpr double q10[] = {1.645, 1.960, 2.128, 2.241, 2.326, 2.394, 2.450, 2.498, 2.539};
  if (k < 2 || k > 10) return std::nullopt;
  if (std::abs(alpha - 0.05) < 1e-12) return q05[k - 2];
  if (std::abs(alpha - 0.10) < 1e-12) return q10[k - 2];
  return std::nullopt;
}

namespace {

struct SignedRanks {
  std::vector<double> ranks;  // of |difference|
  std::vector<bool> positive;
  double w_plus = 0.0, w_minus = 0.0;
  double tie_term = 0.0;  // sum over tie groups of t^3 - t
};

SignedRanks signed_ranks(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ShapeMismatch("wilcoxon: vectors differ in length");
  std::vector<double> mags;
  SignedRanks s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (diff == 0.0) continue;
    mags.push_back(std::abs(diff));
    s.positive.push_back(diff > 0.0);
  }
  if (mags.empty()) throw AllZeroDifferences();
  s.ranks = average_ranks(mags, true);
  for (std::size_t i = 0; i < mags.size(); ++i) (s.positive[i] ? s.w_plus : s.w_minus) += s.ranks[i];
  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    s.tie_term += t * t * t - t;
    i = j + 1;
  }
  return s;
}

WilcoxonResult normal_from(const SignedRanks& s) {
  WilcoxonResult r;
  r.n_eff = static_cast<int>(s.ranks.size());
  r.w_plus = s.w_plus;
  r.w_minus = s.w_minus;
  r.exact = false;
  const double n = r.n_eff;
  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - s.tie_term / 48.0;
  if (!(var > 0.0)) {
    r.p_two_sided = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(s.w_plus - mean) - 0.5) / std::sqrt(var);
  r.p_two_sided = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

}  // namespace

WilcoxonResult wilcoxon_normal_approximation(const std::vector<double>& a, const std::vector<double>& b) {
  return normal_from(signed_ranks(a, b));
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  const SignedRanks s = signed_ranks(a, b);
  if (static_cast<int>(s.ranks.size()) > kExactWilcoxonLimit) return normal_from(s);

  WilcoxonResult r;
  r.n_eff = static_cast<int>(s.ranks.size());
  r.w_plus = s.w_plus;
  r.w_minus = s.w_minus;
  // Average ranks are multiples of 1/2, so doubling makes the enumeration integral.
  std::vector<std::int64_t> doubled(s.ranks.size());
  for (std::size_t i = 0; i < s.ranks.size(); ++i) doubled[i] = std::llround(2.0 * s.ranks[i]);
  const auto observed = static_cast<std::int64_t>(std::llround(2.0 * s.w_plus));
  const kernels::SignedRankTails tails = kernels::omp::signed_rank_tails(doubled, observed);
  const double total = static_cast<double>(tails.total);
  const double tail = static_cast<double>(std::min(tails.at_most, tails.at_least));
  r.p_two_sided = std::min(1.0, 2.0 * tail / total);
  return r;
}

}  // namespace bldl
