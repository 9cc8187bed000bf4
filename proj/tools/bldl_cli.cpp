// bldl: command-line front end for synthetic data, bias simulation,
// degradation, fitting, evaluation, experiments and statistics.

#include <glob.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "bldl/bias.hpp"
#include "bldl/csv_io.hpp"
#include "bldl/dataset.hpp"
#include "bldl/experiment.hpp"
#include "bldl/metrics.hpp"
#include "bldl/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

json read_json(const fs::path& path) {
  try {
    return json::parse(bldl::io::read_text(path));
  } catch (const json::parse_error& e) {
    throw bldl::InvalidConfig(path.string() + ": " + e.what());
  }
}

void copy_if_present(const fs::path& from_dir, const fs::path& to_dir, const char* name) {
  if (fs::equivalent(from_dir, to_dir)) return;
  if (fs::exists(from_dir / name)) {
    fs::create_directories(to_dir);
    fs::copy_file(from_dir / name, to_dir / name, fs::copy_options::overwrite_existing);
  }
}

std::vector<fs::path> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<fs::path> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw bldl::InvalidConfig("grid value '" + item + "' is not a number");
    }
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label distribution learning under biased annotations"};
  app.require_subcommand(1);

  // synth
  int d = 20, m = 8, n = 200, rank = 3;
  std::uint64_t seed = 1;
  std::string out_dir, in_dir;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic low-rank LDL dataset");
  synth->add_option("--d", d, "Feature count")->required();
  synth->add_option("--m", m, "Label count")->required();
  synth->add_option("--n", n, "Instance count")->required();
  synth->add_option("--rank", rank, "Rank of the logit map")->required();
  synth->add_option("--seed", seed, "Generator seed")->required();
  synth->add_option("--out", out_dir, "Output directory")->required();

  // bias
  double c = 0.1;
  auto* bias = app.add_subcommand("bias", "Inject annotation bias into a dataset's distributions");
  bias->add_option("--in", in_dir, "Dataset directory")->required();
  bias->add_option("--c", c, "Bias level C in [0, 1]")->required();
  bias->add_option("--seed", seed, "Bias seed")->required();
  bias->add_option("--out", out_dir, "Output directory")->required();

  // degrade
  double t = bldl::kDefaultThreshold;
  auto* degrade = app.add_subcommand("degrade", "Degrade distributions to multi-hot labels");
  degrade->add_option("--in", in_dir, "Dataset directory")->required();
  degrade->add_option("--t", t, "Coverage threshold T in (0, 1)")->required();
  degrade->add_option("--out", out_dir, "Output directory")->required();

  // fit
  std::string config_path, variant_name = "bldl", trace_path;
  auto* fit = app.add_subcommand("fit", "Fit the ADMM solver on a biased dataset directory");
  fit->add_option("--in", in_dir, "Directory with features.csv, distributions.csv, labels.csv")->required();
  fit->add_option("--config", config_path, "Solver config JSON");
  fit->add_option("--variant", variant_name, "bldl, bldl-a or bldl-b")
      ->check(CLI::IsMember({"bldl", "bldl-a", "bldl-b"}));
  fit->add_option("--trace", trace_path, "Trace CSV path");
  fit->add_option("--out", out_dir, "Output directory")->required();

  // eval
  std::string pred_path, truth_path, out_file;
  auto* eval = app.add_subcommand("eval", "Score predicted distributions against ground truth");
  eval->add_option("--pred", pred_path, "Predicted distributions CSV")->required();
  eval->add_option("--truth", truth_path, "True distributions CSV")->required();
  eval->add_option("--out", out_file, "Output JSON")->required();

  // experiment
  std::string spec_path;
  auto* experiment = app.add_subcommand("experiment", "Run a cross-validated experiment from a JSON spec");
  experiment->add_option("--spec", spec_path, "ExperimentSpec JSON")->required();

  // sensitivity
  std::string param, grid_text;
  auto* sensitivity = app.add_subcommand("sensitivity", "Sweep one hyperparameter over a grid");
  sensitivity->add_option("--spec", spec_path, "ExperimentSpec JSON")->required();
  sensitivity->add_option("--param", param, "alpha, beta, eta or lambda1")
      ->required()
      ->check(CLI::IsMember({"alpha", "beta", "eta", "lambda1"}));
  sensitivity->add_option("--grid", grid_text, "Comma-separated values")->required();

  // stats
  std::string reports_glob, control = "bldl";
  double alpha = 0.05;
  std::optional<double> q_alpha;
  auto* stats = app.add_subcommand("stats", "Friedman, Bonferroni-Dunn and Wilcoxon tests over report files");
  stats->add_option("--reports", reports_glob, "Glob matching report.json files")->required();
  stats->add_option("--control", control, "Control method name");
  stats->add_option("--alpha", alpha, "Significance level");
  stats->add_option("--q", q_alpha, "Bonferroni-Dunn q (default: bundled two-tailed table)");
  stats->add_option("--out", out_file, "Output JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*synth) {
      bldl::save_dataset(bldl::synth_generate(d, m, n, rank, seed), out_dir);
    } else if (*bias) {
      const bldl::Dataset ds = bldl::load_dataset(fs::path(in_dir) / "features.csv", fs::path(in_dir) / "distributions.csv");
      const bldl::DistributionMatrix biased = bldl::inject_bias(ds.D, bldl::BiasConfig{c, seed});
      fs::create_directories(out_dir);
      bldl::io::write_csv(fs::path(out_dir) / "features.csv", ds.X.data().transpose());
      bldl::save_distributions(fs::path(out_dir) / "distributions.csv", biased.data());
      // The unbiased input becomes the ground truth for later recovery checks.
      const fs::path truth = fs::exists(fs::path(in_dir) / "truth.csv") ? fs::path(in_dir) / "truth.csv"
                                                                          : fs::path(in_dir) / "distributions.csv";
      bldl::save_distributions(fs::path(out_dir) / "truth.csv", bldl::load_distributions(truth).data());
    } else if (*degrade) {
      const bldl::DistributionMatrix D = bldl::load_distributions(fs::path(in_dir) / "distributions.csv");
      const bldl::MultiLabelMatrix L = bldl::batch_degrade(D, bldl::DegradeConfig{t});
      fs::create_directories(out_dir);
      for (const char* name : {"features.csv", "distributions.csv", "truth.csv"}) copy_if_present(in_dir, out_dir, name);
      bldl::io::write_csv(fs::path(out_dir) / "labels.csv", L.data().transpose());
    } else if (*fit) {
      const fs::path in(in_dir), out(out_dir);
      bldl::SolverConfig cfg = config_path.empty() ? bldl::SolverConfig{}
                                                   : bldl::solver_config_from_json(read_json(config_path));
      if (fit->count("--variant") || config_path.empty()) cfg.variant = *bldl::parse_variant(variant_name);
      const bldl::Dataset ds = bldl::load_dataset(in / "features.csv", in / "distributions.csv");
      if (!fs::exists(in / "labels.csv"))
        throw bldl::IoError((in / "labels.csv").string() + " missing; run `degrade` first");
      const bldl::MultiLabelMatrix L(bldl::io::read_csv(in / "labels.csv").transpose());
      std::optional<bldl::DistributionMatrix> truth;
      if (fs::exists(in / "truth.csv")) truth = bldl::load_distributions(in / "truth.csv");
      const bldl::FitResult fr = bldl::fit(ds.X, ds.D, L, cfg, truth);
      fs::create_directories(out);
      bldl::io::write_csv(out / "W.csv", fr.W);
      bldl::io::write_csv(out / "O.csv", fr.O);
      bldl::save_distributions(out / "recovered.csv", fr.D_recovered.data());
      bldl::save_distributions(out / "predictions.csv", bldl::predict(fr.W, ds.X.data()).data());
      json summary{{"variant", std::string(bldl::variant_name(cfg.variant))},
                   {"converged", fr.converged},
                   {"iters_run", fr.iters_run},
                   {"final_primal_residual", fr.trace.back().primal_residual},
                   {"config", bldl::to_json(cfg)}};
      if (truth) {
        summary["recovered_error"] = bldl::frobenius_distance(fr.D_recovered.data(), truth->data());
        summary["biased_error"] = bldl::frobenius_distance(ds.D.data(), truth->data());
      }
      bldl::io::write_text(out / "fit.json", summary.dump(2) + "\n");
      if (!trace_path.empty()) {
        std::ostringstream os;
        bldl::write_trace_csv(os, fr.trace);
        bldl::io::write_text(trace_path, os.str());
      }
    } else if (*eval) {
      const bldl::DistributionMatrix pred = bldl::load_distributions(pred_path);
      const bldl::DistributionMatrix truth = bldl::load_distributions(truth_path);
      bldl::io::write_text(out_file, bldl::to_json(bldl::score_report(truth, pred)).dump(2) + "\n");
    } else if (*experiment) {
      const fs::path spec_file(spec_path);
      bldl::ExperimentSpec spec = bldl::experiment_spec_from_json(read_json(spec_file), spec_file.parent_path());
      if (spec.output_dir.empty()) spec.output_dir = spec_file.parent_path() / "out";
      bldl::run_experiment(spec);
    } else if (*sensitivity) {
      const fs::path spec_file(spec_path);
      bldl::ExperimentSpec spec = bldl::experiment_spec_from_json(read_json(spec_file), spec_file.parent_path());
      if (spec.output_dir.empty()) spec.output_dir = spec_file.parent_path() / "out";
      bldl::run_sensitivity(spec, *bldl::parse_sensitivity_param(param), parse_grid(grid_text));
    } else if (*stats) {
      const auto files = expand_glob(reports_glob);
      if (files.empty()) throw bldl::IoError("no report files match " + reports_glob);
      std::vector<bldl::DatasetScores> reports;
      for (const auto& f : files) reports.push_back(bldl::scores_from_report(read_json(f)));
      bldl::io::write_text(out_file, bldl::emit_stats(reports, control, alpha, q_alpha).dump(2) + "\n");
    }
  } catch (const bldl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.numerical() ? kExitNumerical : kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
