#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bldl/errors.hpp"
#include "bldl/metrics.hpp"
#include "test_util.hpp"

using namespace bldl;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Textbook formulas, written independently of the library.
double oracle(Metric m, const Vector& d, const Vector& p) {
  const Eigen::Index n = d.size();
  double acc = 0.0;
  switch (m) {
    case Metric::Chebyshev:
      for (Eigen::Index j = 0; j < n; ++j) acc = std::max(acc, std::abs(d(j) - p(j)));
      return acc;
    case Metric::Clark:
      for (Eigen::Index j = 0; j < n; ++j)
        if (d(j) + p(j) > 0) acc += std::pow((d(j) - p(j)) / (d(j) + p(j)), 2);
      return std::sqrt(acc);
    case Metric::Canberra:
      for (Eigen::Index j = 0; j < n; ++j)
        if (d(j) + p(j) > 0) acc += std::abs(d(j) - p(j)) / (d(j) + p(j));
      return acc;
    case Metric::KL:
      for (Eigen::Index j = 0; j < n; ++j) {
        const double a = std::max(d(j), 1e-12), b = std::max(p(j), 1e-12);
        acc += d(j) * std::log(a / b);
      }
      return acc;
    case Metric::Cosine: {
      double dp = 0, dd = 0, pp = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        dp += d(j) * p(j);
        dd += d(j) * d(j);
        pp += p(j) * p(j);
      }
      return dp / std::sqrt(dd * pp);
    }
    case Metric::Intersection:
      for (Eigen::Index j = 0; j < n; ++j) acc += std::min(d(j), p(j));
      return acc;
  }
  return 0.0;
}

}  // namespace

TEST_CASE("metric names round-trip") {
  for (Metric m : kAllMetrics) CHECK(parse_metric(metric_name(m)) == m);
  CHECK_FALSE(parse_metric("euclid").has_value());
  CHECK(lower_is_better(Metric::KL));
  CHECK_FALSE(lower_is_better(Metric::Cosine));
}

TEST_CASE("identity values are exact for d = p") {
  const Matrix pts = test::random_simplex(7, 100, 1);
  for (Eigen::Index j = 0; j < pts.cols(); ++j) {
    const Vector d = pts.col(j);
    CHECK(per_instance_metric(Metric::Chebyshev, d, d) == 0.0);
    CHECK(per_instance_metric(Metric::Clark, d, d) == 0.0);
    CHECK(per_instance_metric(Metric::Canberra, d, d) == 0.0);
    CHECK(per_instance_metric(Metric::KL, d, d) == 0.0);
    CHECK(per_instance_metric(Metric::Cosine, d, d) == 1.0);
    CHECK(per_instance_metric(Metric::Intersection, d, d) == 1.0);
  }
}

TEST_CASE("hand-computed values for d = [0.5, 0.5], p = [1, 0]") {
  const Vector d = vec({0.5, 0.5}), p = vec({1.0, 0.0});
  CHECK(per_instance_metric(Metric::Chebyshev, d, p) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(per_instance_metric(Metric::Clark, d, p) == doctest::Approx(1.054093).epsilon(1e-6));
  CHECK(per_instance_metric(Metric::Canberra, d, p) == doctest::Approx(1.333333).epsilon(1e-6));
  CHECK(per_instance_metric(Metric::Intersection, d, p) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(per_instance_metric(Metric::Cosine, d, p) == doctest::Approx(0.707107).epsilon(1e-6));
  const double kl = 0.5 * std::log(0.5) + 0.5 * std::log(0.5 / 1e-12);
  CHECK(per_instance_metric(Metric::KL, d, p) == doctest::Approx(kl).epsilon(1e-12));
}

TEST_CASE("two-label Chebyshev family") {
  for (int k = 0; k < 20; ++k) {
    const double t = k / 19.0;
    const Vector d = vec({t, 1 - t}), p = vec({1 - t, t});
    CHECK(per_instance_metric(Metric::Chebyshev, d, p) == doctest::Approx(std::abs(1 - 2 * t)).epsilon(1e-12));
    CHECK(per_instance_metric(Metric::Chebyshev, d, p) == doctest::Approx(oracle(Metric::Chebyshev, d, p)));
  }
}

TEST_CASE("metrics agree with the scalar oracle and respect their ranges") {
  const Matrix a = test::random_simplex(6, 1000, 12);
  const Matrix b = test::random_simplex(6, 1000, 13);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const Vector d = a.col(j), p = b.col(j);
    for (Metric m : kAllMetrics) {
      const double v = per_instance_metric(m, d, p);
      CHECK(v == doctest::Approx(oracle(m, d, p)).epsilon(1e-10));
      CHECK(v >= 0.0);
      if (m != Metric::KL) {
        const double w = per_instance_metric(m, p, d);
        CHECK(v == doctest::Approx(w).epsilon(1e-12));
      }
    }
    CHECK(per_instance_metric(Metric::Chebyshev, d, p) <= 1.0);
    CHECK(per_instance_metric(Metric::Cosine, d, p) <= 1.0);
    CHECK(per_instance_metric(Metric::Intersection, d, p) <= 1.0);
    CHECK(per_instance_metric(Metric::Clark, d, p) <= std::sqrt(6.0));
    CHECK(per_instance_metric(Metric::Canberra, d, p) <= 6.0);
  }
}

TEST_CASE("KL is asymmetric") {
  const Vector d = vec({0.9, 0.1}), p = vec({0.5, 0.5});
  CHECK(per_instance_metric(Metric::KL, d, p) != doctest::Approx(per_instance_metric(Metric::KL, p, d)));
}

TEST_CASE("per_instance_metric validates its inputs") {
  CHECK_THROWS_AS(per_instance_metric(Metric::KL, vec({0.5, 0.5}), vec({1, 0, 0})), ShapeMismatch);
  CHECK_THROWS_AS(per_instance_metric(Metric::KL, vec({0.5, 0.6}), vec({1, 0})), InvalidDistribution);
}

TEST_CASE("aggregate statistics") {
  const DistributionMatrix d = validate_distribution(test::random_simplex(5, 10, 2));
  const MeanStd z = aggregate(Metric::Chebyshev, d, d);
  CHECK(z.mean == 0.0);
  CHECK(z.std == 0.0);

  Matrix t(2, 2), p(2, 2);
  t << 0.5, 0.5, 0.5, 0.5;
  p << 0.6, 0.8, 0.4, 0.2;
  const MeanStd two = aggregate(Metric::Chebyshev, validate_distribution(t), validate_distribution(p));
  CHECK(two.mean == doctest::Approx(0.2));
  CHECK(two.std == doctest::Approx(0.1));

  const Matrix a = test::random_simplex(6, 50, 30), b = test::random_simplex(6, 50, 31);
  for (Metric m : kAllMetrics) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < 50; ++j) sum += oracle(m, a.col(j), b.col(j));
    const MeanStd ms = aggregate(m, validate_distribution(a), validate_distribution(b));
    CHECK(std::abs(ms.mean - sum / 50) < 1e-12);
  }
  CHECK_THROWS_AS(aggregate(Metric::KL, d, validate_distribution(test::random_simplex(5, 9, 2))), ShapeMismatch);
}

TEST_CASE("score_report bundles the six aggregates") {
  const DistributionMatrix d = validate_distribution(test::random_simplex(4, 8, 3));
  const ScoreReport same = score_report(d, d);
  CHECK(same.n_instances == 8);
  for (Metric m : kAllMetrics) {
    CHECK(same.per_metric.at(m).mean == (lower_is_better(m) ? 0.0 : 1.0));
    CHECK(same.per_metric.at(m).std == 0.0);
  }

  const DistributionMatrix onehot = validate_distribution(Matrix::Identity(4, 4));
  const DistributionMatrix uniform = validate_distribution(Matrix::Constant(4, 4, 0.25));
  const ScoreReport r = score_report(onehot, uniform);
  CHECK(r.per_metric.at(Metric::Intersection).mean == doctest::Approx(0.25));
  CHECK(r.per_metric.at(Metric::Chebyshev).mean == doctest::Approx(0.75));

  const DistributionMatrix e = validate_distribution(test::random_simplex(4, 8, 4));
  const ScoreReport q = score_report(d, e);
  for (Metric m : kAllMetrics) CHECK(q.per_metric.at(m).mean == aggregate(m, d, e).mean);
}
