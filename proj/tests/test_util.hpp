#pragma once

#include <cstdint>

#include "bldl/core.hpp"
#include "bldl/rng.hpp"

namespace bldl::test {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  Xoshiro256 rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  return m;
}

// Columns drawn uniformly from the simplex.
inline Matrix random_simplex(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  Matrix out(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) out(i, j) = rng.exponential();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

// Central differences of a scalar function of a matrix.
template <class F>
Matrix numeric_gradient(F&& f, const Matrix& at, double h = 1e-5) {
  Matrix g(at.rows(), at.cols());
  Matrix probe = at;
  for (Eigen::Index j = 0; j < at.cols(); ++j)
    for (Eigen::Index i = 0; i < at.rows(); ++i) {
      const double keep = probe(i, j);
      probe(i, j) = keep + h;
      const double up = f(probe);
      probe(i, j) = keep - h;
      const double down = f(probe);
      probe(i, j) = keep;
      g(i, j) = (up - down) / (2.0 * h);
    }
  return g;
}

}  // namespace bldl::test
