#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bldl/core.hpp"

namespace bldl {

enum class Variant {
  Bldl,   // full model
  BldlA,  // recovery removed: D frozen at D_hat
  BldlB,  // low-rank constraint moved from O^T W X onto O^T W
};

std::string_view variant_name(Variant v) noexcept;  // "bldl", "bldl-a", "bldl-b"
std::optional<Variant> parse_variant(std::string_view name) noexcept;

// Label-space convention. Instances are columns, so the degradation map O
// (m x m) acts on a distribution column as O^T d. The coupled quantity that
// carries the nuclear norm is therefore C = O^T W X (m x n), or O^T W (m x d)
// for BldlB, and the model terms read ||O^T D_hat - L_hat|| and ||O^T D - L_hat||.
struct SolverConfig {
  double alpha = 0.05;    // ||WX - D||^2
  double beta = 0.05;     // ||O^T D_hat - L_hat||^2
  double gamma = 1.0;     // ||O^T D - L_hat||^2
  double eta = 50.0;      // ||D - D_hat||^2
  double lambda1 = 0.01;  // ||W||^2
  double lambda2 = 0.01;  // ||O||^2
  double rho0 = 1e-3;
  double mu = 1.05;
  double rho_max = 1e6;
  int max_iters = 500;
  double tol_primal = 1e-4;
  double tol_change = 1e-5;
  Variant variant = Variant::Bldl;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SolverState {
  Matrix W, O, D, Z, Lambda;
  double rho = 1.0;
  int iter = 0;
};

struct TracePoint {
  int iter = 0;
  double primal_residual = 0.0;  // ||Z - C||_F
  double delta1 = 0.0;           // ||D - D_hat||_F
  double delta2_soft = 0.0;      // ||O^T D - L_hat||_F
  double delta2_hard = 0.0;      // normalized Hamming(degrade(proj D), L_hat)
  double objective = 0.0;        // augmented Lagrangian after the iteration
  std::optional<double> recovery_error;  // ||proj D - D_true||_F

  // Not exported to CSV; kept for boundedness checks.
  double relative_residual = 0.0;
  double lambda_norm = 0.0;
  double max_iterate_norm = 0.0;  // max of ||W||, ||O||, ||D||, ||Z||
};

struct FitResult {
  Matrix W;
  Matrix O;
  Matrix D_raw;  // unprojected final iterate
  DistributionMatrix D_recovered;
  std::vector<TracePoint> trace;
  bool converged = false;
  int iters_run = 0;
};

// Initial ADMM state: W = 0, O = I, D = D_hat, Z = 0, Lambda = 0, rho = rho0.
SolverState initial_state(const Matrix& X, const Matrix& D_hat, const SolverConfig& cfg);

// Singular value thresholding U diag(max(s - tau, 0)) V^T, the proximal map
// of tau ||.||_*.
Matrix svt(const Matrix& A, double tau);

double nuclear_norm(const Matrix& A);

// O^T W X for Bldl/BldlA, O^T W for BldlB.
Matrix coupled_product(const Matrix& W, const Matrix& O, const Matrix& X, Variant variant);

// Each update returns the exact minimizer of its subproblem of the augmented
// Lagrangian with the other blocks held at `s`.
//
// W: the first-order condition is two-sided,
//   (2a I + rho O O^T) W (X X^T) + 2 l1 W = 2a D X^T + O (rho Z + Lambda) X^T
// (BldlB: rho O O^T W + 2a W X X^T + 2 l1 W = 2a D X^T + O (rho Z + Lambda)),
// and is solved exactly in the joint eigenbasis of O O^T and X X^T.
Matrix update_W(const SolverState& s, const Matrix& X, const Matrix& D, const SolverConfig& cfg);

// O = (2b Dh Dh^T + 2g D D^T + rho P P^T + 2 l2 I)^-1 (2b Dh Lh^T + 2g D Lh^T + P (rho Z + Lambda)^T)
// with P = W X (BldlB: P = W). BldlA drops the g term.
Matrix update_O(const SolverState& s, const Matrix& X, const Matrix& D_hat, const Matrix& D, const Matrix& L_hat,
                const SolverConfig& cfg);

// D = ((2a + 2e) I + 2g O O^T)^-1 (2a W X + 2g O Lh + 2e Dh).
Matrix update_D(const SolverState& s, const Matrix& X, const Matrix& D_hat, const Matrix& L_hat,
                const SolverConfig& cfg);

// Z = svt(C - Lambda / rho, 1 / rho).
Matrix update_Z(const SolverState& s, const Matrix& X, const SolverConfig& cfg);

// Lambda + rho (Z - C) and min(mu rho, rho_max).
std::pair<Matrix, double> update_multipliers(const SolverState& s, const Matrix& X, const SolverConfig& cfg);

double evaluate_lagrangian(const SolverState& s, const Matrix& X, const Matrix& D_hat, const Matrix& L_hat,
                           const SolverConfig& cfg);

// `degrade_threshold` is the T that produced L_hat; it is reused to degrade
// the recovered iterate for the delta2_hard trace column.
FitResult fit(const FeatureMatrix& X, const DistributionMatrix& D_hat, const MultiLabelMatrix& L_hat,
              const SolverConfig& cfg, const std::optional<DistributionMatrix>& D_true = std::nullopt,
              double degrade_threshold = 0.7);

// Header: iter,primal_residual,delta1,delta2_soft,delta2_hard,objective,recovery_error
// (recovery_error empty when no ground truth). Reals use 17 significant digits.
void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace);

}  // namespace bldl
