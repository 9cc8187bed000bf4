#include "bldl/core.hpp"

#include <cfloat>
#include <cmath>
#include <string>

namespace bldl {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

bool all_finite(const Matrix& m) noexcept { return m.allFinite(); }

FeatureMatrix::FeatureMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) throw ShapeMismatch("feature matrix must be at least 1x1");
  if (!data_.allFinite()) throw InvalidConfig("feature matrix has non-finite entries");
}

MultiLabelMatrix::MultiLabelMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) throw ShapeMismatch("label matrix must be at least 1x1");
  for (Eigen::Index j = 0; j < data_.cols(); ++j) {
    bool any = false;
    for (Eigen::Index i = 0; i < data_.rows(); ++i) {
      const double v = data_(i, j);
      if (v != 0.0 && v != 1.0)
        throw InvalidDistribution(static_cast<std::size_t>(j), "multi-label entry is not 0 or 1");
      any = any || v == 1.0;
    }
    if (!any) throw InvalidDistribution(static_cast<std::size_t>(j), "instance has no relevant label");
  }
}

DistributionMatrix validate_distribution(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1) throw ShapeMismatch("distribution matrix must be at least 1x1");
  if (!m.allFinite()) throw InvalidConfig("distribution matrix has non-finite entries");
  Matrix out = m;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      double& v = out(i, j);
      if (v < kClampThreshold)
        throw NegativeEntry(static_cast<std::size_t>(i), static_cast<std::size_t>(j), v);
      if (v < 0.0) v = 0.0;
      sum += v;
    }
    if (std::abs(sum - 1.0) > kColumnSumTolerance) throw ColumnSumViolation(static_cast<std::size_t>(j), sum);
  }
  return DistributionMatrix(std::move(out));
}

Vector normalize_to_simplex(const Vector& v) {
  const Eigen::Index m = v.size();
  Vector out = v.cwiseMax(0.0);
  if (const double top = out.maxCoeff(); std::isinf(top)) {
    out = (out.array() == top).cast<double>();
  } else if (!std::isfinite(out.sum())) {
    out /= top;
  }
  const double sum = out.sum();
  if (!(sum >= 1e-12)) return Vector::Constant(m, 1.0 / static_cast<double>(m));
  // Rounding in sum(out / sum) is bounded by ~m ulps.
  if (std::abs(sum - 1.0) <= 8.0 * static_cast<double>(m) * DBL_EPSILON) return out;
  return out / sum;
}

DistributionMatrix project_columns(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j) = normalize_to_simplex(m.col(j));
  return validate_distribution(out);
}

DistributionMatrix predict(const Matrix& W, const Matrix& X) {
  if (W.cols() != X.rows()) throw ShapeMismatch("predict: W is " + shape_of(W) + ", X is " + shape_of(X));
  if (!W.allFinite() || !X.allFinite()) throw InvalidConfig("predict: non-finite input");
  return project_columns(W * X);
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch("frobenius_distance: " + shape_of(a) + " vs " + shape_of(b));
  return (a - b).norm();
}

}  // namespace bldl
