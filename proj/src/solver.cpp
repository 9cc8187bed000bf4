#include "bldl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "bldl/bias.hpp"
#include "bldl/kernels.hpp"

namespace bldl {

namespace {

constexpr double kSingularRatio = 1e-13;

// BldlA keeps D = D_hat and drops the recovery terms.
SolverConfig effective(const SolverConfig& cfg) {
  SolverConfig e = cfg;
  if (cfg.variant == Variant::BldlA) {
    e.gamma = 0.0;
    e.eta = 0.0;
  }
  return e;
}

// Solves lhs * Y = rhs for symmetric positive semi-definite lhs.
Matrix spd_solve(const Matrix& lhs, const Matrix& rhs, const char* which) {
  Eigen::LLT<Matrix> llt(lhs);
  const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
  if (!(rcond > kSingularRatio)) throw SingularSystem(which, rcond > 0.0 ? 1.0 / rcond : INFINITY);
  return llt.solve(rhs);
}

Eigen::SelfAdjointEigenSolver<Matrix> symmetric_eigen(const Matrix& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  if (es.info() != Eigen::Success) throw NonFinite(0, "eigendecomposition");
  return es;
}

}  // namespace

std::string_view variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::Bldl: return "bldl";
    case Variant::BldlA: return "bldl-a";
    case Variant::BldlB: return "bldl-b";
  }
  return "";
}

std::optional<Variant> parse_variant(std::string_view name) noexcept {
  for (Variant v : {Variant::Bldl, Variant::BldlA, Variant::BldlB})
    if (variant_name(v) == name) return v;
  return std::nullopt;
}

void SolverConfig::validate() const {
  for (auto [name, v] : {std::pair{"alpha", alpha}, {"beta", beta}, {"gamma", gamma}, {"eta", eta},
                         {"lambda1", lambda1}, {"lambda2", lambda2}})
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidConfig(std::string(name) + " must be a finite nonnegative real");
  if (!(rho0 > 0.0)) throw InvalidConfig("rho0 must be positive");
  if (!(mu > 1.0)) throw InvalidConfig("mu must exceed 1");
  if (!(rho_max >= rho0)) throw InvalidConfig("rho_max must be at least rho0");
  if (max_iters < 1) throw InvalidConfig("max_iters must be positive");
  if (!(tol_primal > 0.0) || !(tol_change > 0.0)) throw InvalidConfig("tolerances must be positive");
}

SolverState initial_state(const Matrix& X, const Matrix& D_hat, const SolverConfig& cfg) {
  const Eigen::Index m = D_hat.rows();
  const Eigen::Index d = X.rows();
  const Eigen::Index split_cols = cfg.variant == Variant::BldlB ? d : X.cols();
  SolverState s;
  s.W = Matrix::Zero(m, d);
  s.O = Matrix::Identity(m, m);
  s.D = D_hat;
  s.Z = Matrix::Zero(m, split_cols);
  s.Lambda = Matrix::Zero(m, split_cols);
  s.rho = cfg.rho0;
  s.iter = 0;
  return s;
}

Matrix svt(const Matrix& A, double tau) {
  if (!(tau > 0.0)) throw InvalidConfig("svt: tau must be positive");
  if (!A.allFinite()) throw NonFinite(0, "svt input");
  if (A.size() == 0) return A;
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector shrunk = (svd.singularValues().array() - tau).cwiseMax(0.0).matrix();
  return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

double nuclear_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(A).singularValues().sum();
}

Matrix coupled_product(const Matrix& W, const Matrix& O, const Matrix& X, Variant variant) {
  if (variant == Variant::BldlB) return O.transpose() * W;
  return O.transpose() * (W * X);
}

Matrix update_W(const SolverState& s, const Matrix& X, const Matrix& D, const SolverConfig& cfg) {
  const bool on_wo = cfg.variant == Variant::BldlB;
  const Matrix dual = s.rho * s.Z + s.Lambda;
  const Matrix rhs = on_wo ? Matrix(2.0 * cfg.alpha * D * X.transpose() + s.O * dual)
                           : Matrix(2.0 * cfg.alpha * D * X.transpose() + s.O * dual * X.transpose());

  const auto left = symmetric_eigen(s.O * s.O.transpose());
  const auto right = symmetric_eigen(X * X.transpose());
  const Vector a = left.eigenvalues().cwiseMax(0.0);
  const Vector g = right.eigenvalues().cwiseMax(0.0);

  // In the eigenbases the operator is diagonal with entries k(i, j).
  Matrix kappa(a.size(), g.size());
  for (Eigen::Index j = 0; j < g.size(); ++j)
    for (Eigen::Index i = 0; i < a.size(); ++i)
      kappa(i, j) = on_wo ? s.rho * a(i) + 2.0 * cfg.alpha * g(j) + 2.0 * cfg.lambda1
                          : (2.0 * cfg.alpha + s.rho * a(i)) * g(j) + 2.0 * cfg.lambda1;
  const double kmax = kappa.maxCoeff();
  const double kmin = kappa.minCoeff();
  if (!(kmin > kSingularRatio * std::max(kmax, 1.0))) throw SingularSystem("W", kmin > 0.0 ? kmax / kmin : INFINITY);

  const Matrix& U = left.eigenvectors();
  const Matrix& V = right.eigenvectors();
  const Matrix coeffs = (U.transpose() * rhs * V).cwiseQuotient(kappa);
  return U * coeffs * V.transpose();
}

Matrix update_O(const SolverState& s, const Matrix& X, const Matrix& D_hat, const Matrix& D, const Matrix& L_hat,
                const SolverConfig& cfg) {
  const SolverConfig e = effective(cfg);
  const Eigen::Index m = D_hat.rows();
  const Matrix P = cfg.variant == Variant::BldlB ? s.W : Matrix(s.W * X);
  Matrix lhs = 2.0 * e.beta * D_hat * D_hat.transpose() + s.rho * P * P.transpose() +
               2.0 * e.lambda2 * Matrix::Identity(m, m);
  Matrix rhs = 2.0 * e.beta * D_hat * L_hat.transpose() + P * (s.rho * s.Z + s.Lambda).transpose();
  if (e.gamma != 0.0) {
    lhs += 2.0 * e.gamma * D * D.transpose();
    rhs += 2.0 * e.gamma * D * L_hat.transpose();
  }
  return spd_solve(lhs, rhs, "O");
}

Matrix update_D(const SolverState& s, const Matrix& X, const Matrix& D_hat, const Matrix& L_hat,
                const SolverConfig& cfg) {
  const Eigen::Index m = D_hat.rows();
  const Matrix lhs = 2.0 * (cfg.alpha + cfg.eta) * Matrix::Identity(m, m) + 2.0 * cfg.gamma * s.O * s.O.transpose();
  const Matrix rhs = 2.0 * cfg.alpha * s.W * X + 2.0 * cfg.gamma * s.O * L_hat + 2.0 * cfg.eta * D_hat;
  return spd_solve(lhs, rhs, "D");
}

Matrix update_Z(const SolverState& s, const Matrix& X, const SolverConfig& cfg) {
  return svt(coupled_product(s.W, s.O, X, cfg.variant) - s.Lambda / s.rho, 1.0 / s.rho);
}

std::pair<Matrix, double> update_multipliers(const SolverState& s, const Matrix& X, const SolverConfig& cfg) {
  Matrix lambda = s.Lambda + s.rho * (s.Z - coupled_product(s.W, s.O, X, cfg.variant));
  return {std::move(lambda), std::min(cfg.mu * s.rho, cfg.rho_max)};
}

double evaluate_lagrangian(const SolverState& s, const Matrix& X, const Matrix& D_hat, const Matrix& L_hat,
                           const SolverConfig& cfg) {
  const SolverConfig e = effective(cfg);
  const Matrix D = cfg.variant == Variant::BldlA ? D_hat : s.D;
  const Matrix residual = s.Z - coupled_product(s.W, s.O, X, cfg.variant);
  double value = nuclear_norm(s.Z);
  value += e.alpha * (s.W * X - D).squaredNorm();
  value += e.beta * (s.O.transpose() * D_hat - L_hat).squaredNorm();
  value += e.gamma * (s.O.transpose() * D - L_hat).squaredNorm();
  value += e.eta * (D - D_hat).squaredNorm();
  value += e.lambda1 * s.W.squaredNorm() + e.lambda2 * s.O.squaredNorm();
  value += (s.Lambda.array() * residual.array()).sum();
  value += 0.5 * s.rho * residual.squaredNorm();
  return value;
}

namespace {

double relative_change(const Matrix& now, const Matrix& before) {
  return (now - before).norm() / std::max(1.0, before.norm());
}

}  // namespace

FitResult fit(const FeatureMatrix& features, const DistributionMatrix& D_hat_in, const MultiLabelMatrix& L_hat_in,
              const SolverConfig& cfg, const std::optional<DistributionMatrix>& D_true, double degrade_threshold) {
  cfg.validate();
  const Matrix& X = features.data();
  const Matrix& D_hat = D_hat_in.data();
  const Matrix& L_hat = L_hat_in.data();
  if (D_hat.cols() != X.cols() || L_hat.cols() != X.cols())
    throw ShapeMismatch("fit: X, D_hat and L_hat must share the instance count");
  if (L_hat.rows() != D_hat.rows()) throw ShapeMismatch("fit: D_hat and L_hat must share the label count");
  if (D_true && (D_true->labels() != D_hat.rows() || D_true->instances() != D_hat.cols()))
    throw ShapeMismatch("fit: D_true shape differs from D_hat");

  const bool frozen_d = cfg.variant == Variant::BldlA;
  SolverState s = initial_state(X, D_hat, cfg);
  std::vector<TracePoint> trace;
  trace.reserve(static_cast<std::size_t>(cfg.max_iters));
  bool converged = false;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Matrix W_prev = s.W, O_prev = s.O, D_prev = s.D;

    s.W = update_W(s, X, s.D, cfg);
    s.O = update_O(s, X, D_hat, s.D, L_hat, cfg);
    if (!frozen_d) s.D = update_D(s, X, D_hat, L_hat, cfg);
    s.Z = update_Z(s, X, cfg);
    auto [lambda, rho_next] = update_multipliers(s, X, cfg);
    s.Lambda = std::move(lambda);
    s.iter = k;

    if (!s.W.allFinite() || !s.O.allFinite() || !s.D.allFinite() || !s.Z.allFinite() || !s.Lambda.allFinite())
      throw NonFinite(k);

    const Matrix C = coupled_product(s.W, s.O, X, cfg.variant);
    TracePoint tp;
    tp.iter = k;
    tp.primal_residual = (s.Z - C).norm();
    tp.relative_residual = tp.primal_residual / std::max(1.0, C.norm());
    tp.delta1 = (s.D - D_hat).norm();
    tp.delta2_soft = (s.O.transpose() * s.D - L_hat).norm();
    const DistributionMatrix D_proj = project_columns(s.D);
    tp.delta2_hard = normalized_hamming(kernels::omp::degrade_columns(D_proj.data(), degrade_threshold), L_hat);
    // Objective at the penalty used for this iteration's updates.
    tp.objective = evaluate_lagrangian(s, X, D_hat, L_hat, cfg);
    if (D_true) tp.recovery_error = frobenius_distance(D_proj.data(), D_true->data());
    tp.lambda_norm = s.Lambda.norm();
    tp.max_iterate_norm = std::max({s.W.norm(), s.O.norm(), s.D.norm(), s.Z.norm()});
    trace.push_back(tp);

    const double change =
        std::max({relative_change(s.W, W_prev), relative_change(s.O, O_prev), relative_change(s.D, D_prev)});
    s.rho = rho_next;
    if (tp.relative_residual < cfg.tol_primal && change < cfg.tol_change) {
      converged = true;
      break;
    }
  }

  FitResult result{s.W, s.O, s.D, project_columns(s.D), std::move(trace), converged, s.iter};
  return result;
}

void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace) {
  os << "iter,primal_residual,delta1,delta2_soft,delta2_hard,objective,recovery_error\n";
  char buf[512];
  for (const TracePoint& t : trace) {
    int len = std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,", t.iter, t.primal_residual, t.delta1,
                            t.delta2_soft, t.delta2_hard, t.objective);
    os.write(buf, len);
    if (t.recovery_error) {
      len = std::snprintf(buf, sizeof buf, "%.17g", *t.recovery_error);
      os.write(buf, len);
    }
    os << '\n';
  }
}

}  // namespace bldl
