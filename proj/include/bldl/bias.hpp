#pragma once

#include <cstdint>

#include "bldl/core.hpp"
#include "bldl/kernels.hpp"

namespace bldl {

enum class BiasScheme { DirichletMix };

struct BiasConfig {
  double c = 0.1;  // bias level C in [0, 1]
  std::uint64_t seed = 0;
  BiasScheme scheme = BiasScheme::DirichletMix;

  void validate() const;
};

inline constexpr double kDefaultThreshold = 0.7;

struct DegradeConfig {
  double threshold_t = kDefaultThreshold;  // coverage threshold T in (0, 1)

  void validate() const;
};

// d_hat_i = (1 - C) d_i + C u_i with u_i a flat-Dirichlet point drawn from
// Xoshiro256(derive_seed(seed, {i})). Deterministic per seed and independent
// of thread count.
DistributionMatrix inject_bias(const DistributionMatrix& D, const BiasConfig& cfg);

// Same mixture with a caller-supplied simplex sampler.
DistributionMatrix inject_bias(const DistributionMatrix& D, const BiasConfig& cfg,
                               const kernels::SimplexSampler& sampler);

// Greedy coverage degradation: start from the largest degree, keep adding
// the largest remaining one until the covered mass exceeds T. Ties go to
// the lowest label index. Throws InvalidDistribution for non-simplex input.
Vector degrade_to_multilabel(const Vector& d, const DegradeConfig& cfg);

MultiLabelMatrix batch_degrade(const DistributionMatrix& D, const DegradeConfig& cfg);

// Mean over instances of (differing labels / m).
double normalized_hamming(const Matrix& a, const Matrix& b);

}  // namespace bldl
