#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bldl/bias.hpp"
#include "bldl/dataset.hpp"
#include "bldl/errors.hpp"
#include "bldl/solver.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace bldl;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

SolverState scalar_state(double W, double O, double D, double Z, double Lambda, double rho) {
  return SolverState{scalar(W), scalar(O), scalar(D), scalar(Z), scalar(Lambda), rho, 0};
}

// Random subproblem instance, m = 4, d = 3, n = 6.
struct Instance {
  Matrix X, D_hat, L_hat;
  SolverState s;
  SolverConfig cfg;
};

Instance random_instance(std::uint64_t seed, Variant v) {
  const Eigen::Index m = 4, d = 3, n = 6;
  Instance in;
  in.X = test::random_matrix(d, n, derive_seed(seed, {1}));
  in.D_hat = test::random_simplex(m, n, derive_seed(seed, {2}));
  in.L_hat = (test::random_matrix(m, n, derive_seed(seed, {3})).array() > 0.0).cast<double>();
  const Eigen::Index zc = v == Variant::BldlB ? d : n;
  in.s.W = test::random_matrix(m, d, derive_seed(seed, {4}));
  in.s.O = test::random_matrix(m, m, derive_seed(seed, {5}));
  in.s.D = test::random_simplex(m, n, derive_seed(seed, {6}));
  in.s.Z = test::random_matrix(m, zc, derive_seed(seed, {7}));
  in.s.Lambda = test::random_matrix(m, zc, derive_seed(seed, {8}), 0.5);
  Xoshiro256 rng(derive_seed(seed, {9}));
  in.s.rho = 0.1 + 2.0 * rng.uniform();
  in.cfg.alpha = 0.05 + rng.uniform();
  in.cfg.beta = 0.05 + rng.uniform();
  in.cfg.gamma = 0.1 + rng.uniform();
  in.cfg.eta = 0.5 + 5.0 * rng.uniform();
  in.cfg.lambda1 = 0.01 + 0.1 * rng.uniform();
  in.cfg.lambda2 = 0.01 + 0.1 * rng.uniform();
  in.cfg.variant = v;
  return in;
}

}  // namespace

TEST_CASE("variant names round-trip") {
  for (Variant v : {Variant::Bldl, Variant::BldlA, Variant::BldlB}) CHECK(parse_variant(variant_name(v)) == v);
  CHECK_FALSE(parse_variant("bldl-c").has_value());
}

TEST_CASE("SolverConfig validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.mu = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = SolverConfig{};
  c.alpha = -1;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = SolverConfig{};
  c.rho0 = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = SolverConfig{};
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
}

TEST_CASE("svt examples") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2;
  a(1, 1) = 1;
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 1.5;
  expect(1, 1) = 0.5;
  CHECK(svt(a, 0.5) == expect);
  CHECK(svt(Matrix::Zero(3, 4), 0.7) == Matrix::Zero(3, 4));
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = NAN;
  CHECK_THROWS_AS(svt(bad, 0.1), NonFinite);
}

TEST_CASE("svt is the proximal map of the nuclear norm") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix A = test::random_matrix(6, 5, derive_seed(31, {seed}));
    for (double tau : {0.1, 0.3, 0.5, 2.0}) {
      const Matrix z = svt(A, tau);
      const Matrix ref = oracle::svt_als(A, tau);
      const double fz = oracle::prox_objective(z, A, tau);
      CHECK(fz <= oracle::prox_objective(ref, A, tau) + 1e-8);
      CHECK((z - ref).norm() <= 1e-6 * std::max(1.0, ref.norm()));
      CHECK((z - A).norm() <= std::sqrt(5.0) * tau + 1e-12);
      CHECK(nuclear_norm(z) == doctest::Approx(oracle::nuclear_norm(z)).epsilon(1e-10));
    }
  }
}

TEST_CASE("update_W scalar examples") {
  SolverConfig c;
  c.alpha = 1;
  c.lambda1 = 0;
  const SolverState s = scalar_state(0, 1, 3, 0, 0, 2);
  CHECK(update_W(s, scalar(1), scalar(3), c)(0, 0) == doctest::Approx(1.5).epsilon(1e-14));

  c.alpha = 0;
  c.lambda1 = 1;
  CHECK(update_W(s, scalar(0), scalar(3), c)(0, 0) == 0.0);

  c.alpha = 1;
  c.lambda1 = 0;
  const SolverState dead = scalar_state(0, 0, 3, 0, 0, 1);
  CHECK_THROWS_AS(update_W(dead, scalar(0), scalar(3), c), SingularSystem);
}

TEST_CASE("update_O scalar examples") {
  SolverConfig c;
  c.beta = c.gamma = 1;
  c.lambda2 = 0;
  const SolverState s = scalar_state(0, 0, 1, 0, 0, 0);
  CHECK(update_O(s, scalar(1), scalar(1), scalar(1), scalar(1), c)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  SolverConfig r;
  const Instance in = random_instance(3, Variant::Bldl);
  SolverState z = in.s;
  z.Z.setZero();
  z.Lambda.setZero();
  z.rho = 0;
  CHECK(update_O(z, in.X, in.D_hat, z.D, Matrix::Zero(4, 6), r).norm() < 1e-14);
}

TEST_CASE("update_D scalar examples") {
  SolverConfig c;
  c.alpha = c.gamma = c.eta = 1;
  const SolverState s = scalar_state(1, 1, 0, 0, 0, 1);
  CHECK(update_D(s, scalar(1), scalar(2), scalar(0), c)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  const Instance in = random_instance(4, Variant::Bldl);
  SolverConfig mid = in.cfg;
  mid.gamma = 0;
  mid.eta = mid.alpha;
  const Matrix D = update_D(in.s, in.X, in.D_hat, in.L_hat, mid);
  CHECK((D - 0.5 * (in.s.W * in.X + in.D_hat)).norm() < 1e-13);
}

TEST_CASE("subproblem updates are stationary points") {
  for (Variant v : {Variant::Bldl, Variant::BldlA, Variant::BldlB}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Instance in = random_instance(derive_seed(77, {seed}), v);
      const Matrix& D = v == Variant::BldlA ? in.D_hat : in.s.D;

      const Matrix W = update_W(in.s, in.X, D, in.cfg);
      const Matrix gW = test::numeric_gradient(
          [&](const Matrix& w) { return oracle::w_objective(w, in.s, in.X, D, in.cfg); }, W);
      CHECK(gW.cwiseAbs().maxCoeff() < 1e-6);

      const Matrix O = update_O(in.s, in.X, in.D_hat, D, in.L_hat, in.cfg);
      const Matrix gO = test::numeric_gradient(
          [&](const Matrix& o) { return oracle::o_objective(o, in.s, in.X, in.D_hat, D, in.L_hat, in.cfg); }, O);
      CHECK(gO.cwiseAbs().maxCoeff() < 1e-6);

      if (v == Variant::BldlA) continue;
      const Matrix Dn = update_D(in.s, in.X, in.D_hat, in.L_hat, in.cfg);
      const Matrix gD = test::numeric_gradient(
          [&](const Matrix& d) { return oracle::d_objective(d, in.s, in.X, in.D_hat, in.L_hat, in.cfg); }, Dn);
      CHECK(gD.cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("update_Z and multiplier examples") {
  SolverConfig c;
  SolverState zero = scalar_state(0, 0, 0, 0, 0, 1);
  CHECK(update_Z(zero, scalar(1), c)(0, 0) == 0.0);

  // W X O-side product diag(2, 1) with Lambda = 0, rho = 2
  SolverState s;
  s.W = Matrix::Zero(2, 2);
  s.W(0, 0) = 2;
  s.W(1, 1) = 1;
  s.O = Matrix::Identity(2, 2);
  s.Lambda = Matrix::Zero(2, 2);
  s.Z = Matrix::Zero(2, 2);
  s.rho = 2;
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 1.5;
  expect(1, 1) = 0.5;
  CHECK(update_Z(s, Matrix::Identity(2, 2), c) == expect);

  c.mu = 1.5;
  s.Z = coupled_product(s.W, s.O, Matrix::Identity(2, 2), Variant::Bldl);
  s.Lambda = Matrix::Constant(2, 2, 0.25);
  auto [lam, rho] = update_multipliers(s, Matrix::Identity(2, 2), c);
  CHECK(lam == s.Lambda);
  CHECK(rho == 3.0);

  SolverState one = scalar_state(0, 1, 0, 1, 0, 1);
  auto [lam1, rho1] = update_multipliers(one, scalar(1), c);
  CHECK(lam1(0, 0) == 1.0);

  c.rho_max = 2.5;
  CHECK(update_multipliers(s, Matrix::Identity(2, 2), c).second == 2.5);
}

TEST_CASE("multiplier stays in the shrinkage ball after a Z step") {
  for (Variant v : {Variant::Bldl, Variant::BldlB}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Instance in = random_instance(derive_seed(5, {seed}), v);
      in.s.Lambda *= 10.0;
      in.s.Z = update_Z(in.s, in.X, in.cfg);
      const Matrix A = coupled_product(in.s.W, in.s.O, in.X, v) - in.s.Lambda / in.s.rho;
      CHECK((in.s.Z - A).norm() <= std::sqrt(4.0) / in.s.rho + 1e-12);
      const Matrix lam = update_multipliers(in.s, in.X, in.cfg).first;
      CHECK(lam.norm() <= 2.0 + 1e-9);
    }
  }
}

TEST_CASE("evaluate_lagrangian matches the loop oracle") {
  SolverConfig c;
  SolverState zero{Matrix::Zero(2, 3), Matrix::Zero(2, 2), Matrix::Zero(2, 4), Matrix::Zero(2, 4),
                   Matrix::Zero(2, 4), 1.0, 0};
  CHECK(evaluate_lagrangian(zero, Matrix::Zero(3, 4), Matrix::Zero(2, 4), Matrix::Zero(2, 4), c) == 0.0);

  SolverConfig e;
  e.alpha = e.beta = e.gamma = e.lambda1 = e.lambda2 = 0;
  e.eta = 1;
  SolverState shifted = zero;
  shifted.D = Matrix::Ones(2, 4);
  CHECK(evaluate_lagrangian(shifted, Matrix::Zero(3, 4), Matrix::Zero(2, 4), Matrix::Zero(2, 4), e) == 8.0);

  for (Variant v : {Variant::Bldl, Variant::BldlA, Variant::BldlB}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Instance in = random_instance(derive_seed(9, {seed}), v);
      const double got = evaluate_lagrangian(in.s, in.X, in.D_hat, in.L_hat, in.cfg);
      const double ref = oracle::lagrangian_loops(in.s, in.X, in.D_hat, in.L_hat, in.cfg);
      CHECK(got == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("fit on the scalar problem reaches the fixed point") {
  SolverConfig c;
  c.tol_primal = 1e-7;
  const FitResult r = fit(FeatureMatrix(scalar(1)), validate_distribution(scalar(1)),
                          MultiLabelMatrix(scalar(1)), c);
  CHECK(r.converged);
  CHECK(r.trace.back().primal_residual < 1e-6);
  CHECK(r.D_recovered.data()(0, 0) == 1.0);
}

TEST_CASE("fit: BldlA never moves D") {
  const Dataset ds = synth_generate(5, 4, 30, 2, 3);
  const DistributionMatrix h = inject_bias(ds.D, BiasConfig{0.2, 1});
  SolverConfig c;
  c.variant = Variant::BldlA;
  c.max_iters = 60;
  const FitResult r = fit(ds.X, h, batch_degrade(h, {0.7}), c, ds.D);
  for (const auto& tp : r.trace) {
    CHECK(tp.delta1 == 0.0);
    CHECK(*tp.recovery_error == frobenius_distance(h.data(), ds.D.data()));
  }
  CHECK(r.D_raw == h.data());
}

TEST_CASE("fit is deterministic and writes a well-formed trace") {
  const Dataset ds = synth_generate(6, 4, 40, 2, 8);
  const DistributionMatrix h = inject_bias(ds.D, BiasConfig{0.3, 2});
  const MultiLabelMatrix l = batch_degrade(h, {0.7});
  SolverConfig c;
  c.max_iters = 40;
  const FitResult a = fit(ds.X, h, l, c, ds.D);
  const FitResult b = fit(ds.X, h, l, c, ds.D);
  CHECK(a.W == b.W);
  CHECK(a.O == b.O);
  CHECK(a.D_raw == b.D_raw);
  REQUIRE(a.trace.size() == static_cast<std::size_t>(a.iters_run));
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].iter == static_cast<int>(i) + 1);
    CHECK(a.trace[i].objective == b.trace[i].objective);
    CHECK(a.trace[i].lambda_norm <= 2.0 + 1e-9);
  }
  std::ostringstream os;
  write_trace_csv(os, a.trace);
  const std::string csv = os.str();
  CHECK(csv.rfind("iter,primal_residual,delta1,delta2_soft,delta2_hard,objective,recovery_error\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(a.trace.size()) + 1);

  std::ostringstream none;
  write_trace_csv(none, fit(ds.X, h, l, c).trace);
  CHECK(none.str().find(",\n") != std::string::npos);
}

TEST_CASE("fit rejects inconsistent shapes") {
  SolverConfig c;
  CHECK_THROWS_AS(fit(FeatureMatrix(Matrix::Ones(2, 3)), validate_distribution(Matrix::Constant(2, 4, 0.5)),
                      MultiLabelMatrix(Matrix::Ones(2, 4)), c),
                  ShapeMismatch);
}
