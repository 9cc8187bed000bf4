#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bldl/core.hpp"

namespace bldl {

// Average ranks (1-based) of `values`; ties share the mean of their positions.
// With lower_is_better the smallest value gets rank 1.
std::vector<double> average_ranks(const std::vector<double>& values, bool lower_is_better = true);

// N datasets x k methods.
struct RankTable {
  Matrix ranks;
  std::vector<std::string> method_names;

  // scores is N x k; each row is ranked independently.
  static RankTable from_scores(const Matrix& scores, std::vector<std::string> method_names, bool lower_is_better);
  void validate() const;
};

struct FriedmanResult {
  double chi2 = 0.0;
  double f_stat = 0.0;  // +inf when degenerate
  int df1 = 0;
  int df2 = 0;
  bool degenerate = false;  // chi2 == N (k - 1): perfectly consistent ordering
  std::vector<double> mean_ranks;
};

FriedmanResult friedman(const RankTable& table);

// Survival function of F(df1, df2), via the regularized incomplete beta.
double f_survival(double x, double df1, double df2);

// Upper-alpha quantile of F(df1, df2) by bisection on f_survival, |error| <= 1e-6.
double f_critical(double alpha, double df1, double df2);

double bonferroni_dunn_cd(int k, int n_datasets, double q_alpha);

// Two-tailed Bonferroni-Dunn q for k = 2..10 at alpha in {0.05, 0.10}.
std::optional<double> bonferroni_dunn_q(int k, double alpha);

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_two_sided = 1.0;
  int n_eff = 0;
  bool exact = true;
};

inline constexpr int kExactWilcoxonLimit = 20;

// Differences a - b with zeros dropped; exact enumeration up to 20 nonzero
// pairs, normal approximation with continuity and tie correction above.
// Throws AllZeroDifferences.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

// Normal approximation for any n_eff; exposed for the enumeration cross-check.
WilcoxonResult wilcoxon_normal_approximation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace bldl
