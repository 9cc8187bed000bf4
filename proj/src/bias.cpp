#include "bldl/bias.hpp"

#include <cmath>
#include <string>

namespace bldl {

void BiasConfig::validate() const {
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidConfig("bias level c must lie in [0, 1], got " + std::to_string(c));
}

void DegradeConfig::validate() const {
  if (!(threshold_t > 0.0 && threshold_t < 1.0))
    throw InvalidConfig("threshold t must lie in (0, 1), got " + std::to_string(threshold_t));
}

DistributionMatrix inject_bias(const DistributionMatrix& D, const BiasConfig& cfg) {
  return inject_bias(D, cfg, kernels::flat_dirichlet_sampler(cfg.seed));
}

DistributionMatrix inject_bias(const DistributionMatrix& D, const BiasConfig& cfg,
                               const kernels::SimplexSampler& sampler) {
  cfg.validate();
  return validate_distribution(kernels::omp::mix_columns(D.data(), cfg.c, sampler));
}

Vector degrade_to_multilabel(const Vector& d, const DegradeConfig& cfg) {
  cfg.validate();
  try {
    validate_distribution(d);
  } catch (const Error& e) {
    throw InvalidDistribution(0, e.what());
  }
  Vector out(d.size());
  kernels::degrade_column(d.data(), d.size(), cfg.threshold_t, out.data());
  return out;
}

MultiLabelMatrix batch_degrade(const DistributionMatrix& D, const DegradeConfig& cfg) {
  cfg.validate();
  return MultiLabelMatrix(kernels::omp::degrade_columns(D.data(), cfg.threshold_t));
}

double normalized_hamming(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch("normalized_hamming: shape mismatch");
  const double diff = (a.array() != b.array()).cast<double>().sum();
  return diff / static_cast<double>(a.size());
}

}  // namespace bldl
