#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bldl/bias.hpp"
#include "bldl/dataset.hpp"
#include "bldl/metrics.hpp"
#include "bldl/solver.hpp"

namespace bldl {

// Where an experiment's data comes from: a synthetic draw or a CSV pair.
struct DatasetRef {
  struct Synth {
    int d = 20, m = 8, n = 200, rank = 3;
    std::uint64_t seed = 1;
  };
  std::optional<Synth> synth;
  std::filesystem::path features, distributions;
  std::string name;

  Dataset load() const;
};

struct ExperimentSpec {
  DatasetRef dataset;
  BiasConfig bias;
  DegradeConfig degrade;
  SolverConfig solver;
  int folds = 5;
  std::vector<Variant> variants{Variant::Bldl, Variant::BldlA, Variant::BldlB};
  std::filesystem::path output_dir;  // empty: nothing written

  void validate(long n_instances) const;
};

struct FoldOutcome {
  int fold = 0;
  long n_test = 0;
  ScoreReport scores;
  bool converged = false;
  int iters = 0;
  double recovered_error = 0.0;  // ||D_recovered - D_true||_F on the training block
  double biased_error = 0.0;     // ||D_hat - D_true||_F on the training block
  std::vector<TracePoint> trace;
};

struct VariantOutcome {
  Variant variant = Variant::Bldl;
  ScoreReport summary;  // mean and population std of the fold means
  std::vector<FoldOutcome> folds;
};

struct ExperimentReport {
  std::string dataset;
  long n_instances = 0;
  std::vector<VariantOutcome> variants;

  const VariantOutcome& at(Variant v) const;
};

// Test fold f is the f-th contiguous block of a seeded permutation.
std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, int folds, std::uint64_t seed);

// Per fold: bias the training block (seed derive_seed(bias.seed, {fold})),
// degrade it to L_hat, fit every variant, predict the test block and score it
// against the clean distributions. Fold x variant fits run in parallel;
// output is independent of the schedule. With output_dir set, writes
// report.json, scores.csv, recovery.csv and traces/<variant>_fold<k>.csv.
ExperimentReport run_experiment(const ExperimentSpec& spec);

enum class SensitivityParam { Alpha, Beta, Eta, Lambda1 };
std::optional<SensitivityParam> parse_sensitivity_param(std::string_view name) noexcept;
std::string_view sensitivity_param_name(SensitivityParam p) noexcept;

struct SensitivityRow {
  double value = 0.0;
  Variant variant = Variant::Bldl;
  ScoreReport summary;
  bool all_converged = false;
};

// One run_experiment per grid value (into output_dir/<param>_<index>); the
// table is written to output_dir/sensitivity.csv and sensitivity.json.
std::vector<SensitivityRow> run_sensitivity(const ExperimentSpec& spec, SensitivityParam param,
                                            const std::vector<double>& grid);

// Metric means of each method on one dataset, as read back from report.json.
struct DatasetScores {
  std::string dataset;
  std::map<std::string, std::map<Metric, double>> methods;
};

DatasetScores scores_from_report(const nlohmann::json& report);

// Friedman + F critical value + Bonferroni-Dunn CD + Wilcoxon of `control`
// against each other method, one record per metric.
nlohmann::json emit_stats(const std::vector<DatasetScores>& reports, const std::string& control, double alpha,
                          std::optional<double> q_alpha = std::nullopt);

// JSON plumbing.
SolverConfig solver_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SolverConfig& cfg);
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const ExperimentSpec& spec);
nlohmann::json to_json(const ScoreReport& r);
nlohmann::json to_json(const ExperimentReport& r, const ExperimentSpec& spec);

}  // namespace bldl
