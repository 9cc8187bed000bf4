#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bldl/core.hpp"

namespace bldl {

enum class Metric { Chebyshev, Clark, Canberra, KL, Cosine, Intersection };

inline constexpr std::array<Metric, 6> kAllMetrics = {Metric::Chebyshev, Metric::Clark,  Metric::Canberra,
                                                      Metric::KL,        Metric::Cosine, Metric::Intersection};

// Lower is better for the four distances, higher for Cosine and Intersection.
constexpr bool lower_is_better(Metric m) noexcept { return m != Metric::Cosine && m != Metric::Intersection; }

std::string_view metric_name(Metric m) noexcept;
std::optional<Metric> parse_metric(std::string_view name) noexcept;

inline constexpr double kKlFloor = 1e-12;

// Raw per-instance formula over m entries; assumes both inputs are valid.
double metric_value(Metric name, const double* d, const double* p, Eigen::Index m) noexcept;

// Validating front end: throws ShapeMismatch / InvalidDistribution.
double per_instance_metric(Metric name, const Vector& d, const Vector& p);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(const std::vector<double>& values) noexcept;

MeanStd aggregate(Metric name, const DistributionMatrix& truth, const DistributionMatrix& pred);

struct ScoreReport {
  std::map<Metric, MeanStd> per_metric;
  long n_instances = 0;
};

ScoreReport score_report(const DistributionMatrix& truth, const DistributionMatrix& pred);

}  // namespace bldl
