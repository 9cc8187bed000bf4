#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "bldl/core.hpp"

namespace bldl {

struct Dataset {
  std::string name;
  FeatureMatrix X;
  DistributionMatrix D;
};

// Row-per-instance CSV pair. Distribution rows are validated (an invalid row
// throws InvalidDistribution with its 1-based row number), renormalized, and
// both matrices are transposed to the column-instance layout.
Dataset load_dataset(const std::filesystem::path& features_path, const std::filesystem::path& distributions_path,
                     std::string name = "");

// Writes <dir>/features.csv and <dir>/distributions.csv.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

// Row-per-instance distributions file.
DistributionMatrix load_distributions(const std::filesystem::path& path);
void save_distributions(const std::filesystem::path& path, const Matrix& columns);

// Synthetic low-rank LDL problem drawn from Xoshiro256(seed) in this order:
// A (m x r, N(0,1)), B (r x d, N(0,1)/sqrt(d)), X (d x n, N(0,1)), all
// column-major. D_true = column-wise softmax(A B X).
Dataset synth_generate(int d, int m, int n, int rank_r, std::uint64_t seed);

}  // namespace bldl
