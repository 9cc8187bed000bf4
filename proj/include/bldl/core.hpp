#pragma once

#include <Eigen/Dense>

#include "bldl/errors.hpp"

namespace bldl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kColumnSumTolerance = 1e-9;
inline constexpr double kClampThreshold = -1e-12;

// Instances are columns throughout: X is d x n, distributions are m x n.

// d x n finite feature matrix.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Matrix data);

  const Matrix& data() const noexcept { return data_; }
  Eigen::Index features() const noexcept { return data_.rows(); }
  Eigen::Index instances() const noexcept { return data_.cols(); }

 private:
  Matrix data_;
};

// m x n matrix whose columns lie on the probability simplex. Only obtainable
// through validate_distribution() (or helpers that call it), so holding one
// means the invariant was checked.
class DistributionMatrix {
 public:
  const Matrix& data() const noexcept { return data_; }
  Eigen::Index labels() const noexcept { return data_.rows(); }
  Eigen::Index instances() const noexcept { return data_.cols(); }

 private:
  explicit DistributionMatrix(Matrix data) : data_(std::move(data)) {}
  Matrix data_;

  friend DistributionMatrix validate_distribution(const Matrix& m);
};

// m x n binary matrix, stored as doubles so it enters the solver algebra
// directly. Every column has at least one relevant label.
class MultiLabelMatrix {
 public:
  explicit MultiLabelMatrix(Matrix data);

  const Matrix& data() const noexcept { return data_; }
  Eigen::Index labels() const noexcept { return data_.rows(); }
  Eigen::Index instances() const noexcept { return data_.cols(); }

 private:
  Matrix data_;
};

// Entries in [-1e-12, 0) are clamped to zero; anything more negative throws
// NegativeEntry, and a column sum outside 1 +/- 1e-9 throws ColumnSumViolation.
DistributionMatrix validate_distribution(const Matrix& m);

// Clamp negatives to zero and rescale to unit sum; an all-nonpositive input
// maps to the uniform vector. Vectors already summing to 1 within a few ulps
// are returned as clamped, which makes the map exactly idempotent.
Vector normalize_to_simplex(const Vector& v);

// Column-wise normalize_to_simplex, validated.
DistributionMatrix project_columns(const Matrix& m);

// normalize_to_simplex(W * X) per column.
DistributionMatrix predict(const Matrix& W, const Matrix& X);

double frobenius_distance(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m) noexcept;

}  // namespace bldl
