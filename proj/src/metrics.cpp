#include "bldl/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "bldl/kernels.hpp"

namespace bldl {

std::string_view metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::Chebyshev: return "chebyshev";
    case Metric::Clark: return "clark";
    case Metric::Canberra: return "canberra";
    case Metric::KL: return "kl";
    case Metric::Cosine: return "cosine";
    case Metric::Intersection: return "intersection";
  }
  return "";
}

std::optional<Metric> parse_metric(std::string_view name) noexcept {
  for (Metric m : kAllMetrics)
    if (metric_name(m) == name) return m;
  return std::nullopt;
}

double metric_value(Metric name, const double* d, const double* p, Eigen::Index m) noexcept {
  double acc = 0.0;
  switch (name) {
    case Metric::Chebyshev:
      for (Eigen::Index j = 0; j < m; ++j) acc = std::max(acc, std::abs(d[j] - p[j]));
      return acc;
    case Metric::Clark:
      for (Eigen::Index j = 0; j < m; ++j) {
        const double s = d[j] + p[j];
        if (s > 0.0) acc += (d[j] - p[j]) * (d[j] - p[j]) / (s * s);
      }
      return std::sqrt(acc);
    case Metric::Canberra:
      for (Eigen::Index j = 0; j < m; ++j) {
        const double s = d[j] + p[j];
        if (s > 0.0) acc += std::abs(d[j] - p[j]) / s;
      }
      return acc;
    case Metric::KL:
      for (Eigen::Index j = 0; j < m; ++j) {
        const double dj = std::max(d[j], kKlFloor);
        const double pj = std::max(p[j], kKlFloor);
        acc += dj * std::log(dj / pj);
      }
      return acc;
    case Metric::Cosine: {
      double dd = 0.0, pp = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        acc += d[j] * p[j];
        dd += d[j] * d[j];
        pp += p[j] * p[j];
      }
      if (dd == pp && acc == dd) return 1.0;  // d == p
      return std::clamp(acc / (std::sqrt(dd) * std::sqrt(pp)), 0.0, 1.0);
    }
    case Metric::Intersection:
      // sum_j min(d_j, p_j) == 1 - sum_j |d_j - p_j| / 2 on the simplex; this
      // form returns exactly 1 for d == p regardless of column-sum rounding.
      for (Eigen::Index j = 0; j < m; ++j) acc += std::abs(d[j] - p[j]);
      return std::clamp(1.0 - 0.5 * acc, 0.0, 1.0);
  }
  return acc;
}

double per_instance_metric(Metric name, const Vector& d, const Vector& p) {
  if (d.size() != p.size()) throw ShapeMismatch("per_instance_metric: length mismatch");
  auto checked = [](const Vector& v, std::size_t which) {
    try {
      return Vector(validate_distribution(v).data().col(0));
    } catch (const InvalidDistribution&) {
      throw;
    } catch (const Error& e) {
      throw InvalidDistribution(which, e.what());
    }
  };
  const Vector dc = checked(d, 0), pc = checked(p, 1);
  return metric_value(name, dc.data(), pc.data(), dc.size());
}

MeanStd mean_std(const std::vector<double>& values) noexcept {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

MeanStd aggregate(Metric name, const DistributionMatrix& truth, const DistributionMatrix& pred) {
  if (truth.labels() != pred.labels() || truth.instances() != pred.instances())
    throw ShapeMismatch("aggregate: truth and prediction shapes differ");
  return mean_std(kernels::omp::metric_columns(name, truth.data(), pred.data()));
}

ScoreReport score_report(const DistributionMatrix& truth, const DistributionMatrix& pred) {
  ScoreReport r;
  for (Metric m : kAllMetrics) r.per_metric[m] = aggregate(m, truth, pred);
  r.n_instances = static_cast<long>(truth.instances());
  return r;
}

}  // namespace bldl
