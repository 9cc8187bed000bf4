#include "bldl/dataset.hpp"

#include <cmath>

#include "bldl/csv_io.hpp"
#include "bldl/rng.hpp"

namespace bldl {

DistributionMatrix load_distributions(const std::filesystem::path& path) {
  const Matrix rows = io::read_csv(path);
  Matrix cols = rows.transpose();
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    try {
      validate_distribution(cols.col(j));
    } catch (const NegativeEntry& e) {
      throw InvalidDistribution(static_cast<std::size_t>(j) + 1, e.what());
    } catch (const ColumnSumViolation& e) {
      throw InvalidDistribution(static_cast<std::size_t>(j) + 1, e.what());
    } catch (const InvalidConfig& e) {
      throw InvalidDistribution(static_cast<std::size_t>(j) + 1, e.what());
    }
  }
  return project_columns(cols);
}

void save_distributions(const std::filesystem::path& path, const Matrix& columns) {
  io::write_csv(path, columns.transpose());
}

Dataset load_dataset(const std::filesystem::path& features_path, const std::filesystem::path& distributions_path,
                     std::string name) {
  const Matrix features = io::read_csv(features_path);
  DistributionMatrix D = load_distributions(distributions_path);
  if (features.rows() != D.instances())
    throw RowCountMismatch(static_cast<std::size_t>(features.rows()), static_cast<std::size_t>(D.instances()));
  if (name.empty()) name = features_path.parent_path().filename().string();
  return Dataset{std::move(name), FeatureMatrix(features.transpose()), std::move(D)};
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  io::write_csv(dir / "features.csv", ds.X.data().transpose());
  save_distributions(dir / "distributions.csv", ds.D.data());
}

Dataset synth_generate(int d, int m, int n, int rank_r, std::uint64_t seed) {
  if (d < 1 || m < 1 || n < 1) throw InvalidConfig("synth: d, m, n must be positive");
  if (rank_r < 1 || rank_r > std::min(m, d))
    throw InvalidRank("synth: rank must lie in [1, min(m, d)] = [1, " + std::to_string(std::min(m, d)) + "]");
  Xoshiro256 rng(seed);
  // all factors standard normal, drawn column-major in the order A, B, X
  auto draw = [&rng](Eigen::Index rows, Eigen::Index cols) {
    Matrix out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = rng.normal();
    return out;
  };
  const Matrix A = draw(m, rank_r);
  const Matrix B = draw(rank_r, d);
  Matrix X = draw(d, n);
  const Matrix logits = A * (B * X);
  Matrix D(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vector e = (logits.col(j).array() - logits.col(j).maxCoeff()).exp().matrix();
    D.col(j) = e / e.sum();
  }
  return Dataset{"synth-d" + std::to_string(d) + "-m" + std::to_string(m) + "-n" + std::to_string(n) + "-r" +
                     std::to_string(rank_r) + "-s" + std::to_string(seed),
                 FeatureMatrix(std::move(X)), validate_distribution(D)};
}

}  // namespace bldl
