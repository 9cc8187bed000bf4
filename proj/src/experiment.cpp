#include "bldl/experiment.hpp"

#include <chrono>
#include <ctime>
#include <exception>
#include <set>
#include <sstream>

#include "bldl/csv_io.hpp"
#include "bldl/rng.hpp"
#include "bldl/stats.hpp"

namespace bldl {

using nlohmann::json;

namespace {

Matrix select_columns(const Matrix& m, const std::vector<std::size_t>& idx) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(idx[j]));
  return out;
}

ScoreReport summarize_folds(const std::vector<FoldOutcome>& folds) {
  ScoreReport r;
  for (Metric m : kAllMetrics) {
    std::vector<double> means;
    means.reserve(folds.size());
    for (const auto& f : folds) means.push_back(f.scores.per_metric.at(m).mean);
    r.per_metric[m] = mean_std(means);
  }
  for (const auto& f : folds) r.n_instances += f.n_test;
  return r;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw InvalidConfig(std::string(what) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidConfig(std::string(what) + ": unknown key '" + key + "'");
  }
}

Variant variant_from_json(const json& j) {
  const auto name = j.get<std::string>();
  const auto v = parse_variant(name);
  if (!v) throw InvalidConfig("unknown variant '" + name + "' (expected bldl, bldl-a or bldl-b)");
  return *v;
}

}  // namespace

// ---------------------------------------------------------------- JSON

SolverConfig solver_config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"alpha", "beta", "gamma", "eta", "lambda1", "lambda2", "rho0", "mu", "rho_max", "max_iters",
                       "tol_primal", "tol_change", "variant", "seed"},
                      "solver config");
  SolverConfig c;
  try {
    c.alpha = get_or(j, "alpha", c.alpha);
    c.beta = get_or(j, "beta", c.beta);
    c.gamma = get_or(j, "gamma", c.gamma);
    c.eta = get_or(j, "eta", c.eta);
    c.lambda1 = get_or(j, "lambda1", c.lambda1);
    c.lambda2 = get_or(j, "lambda2", c.lambda2);
    c.rho0 = get_or(j, "rho0", c.rho0);
    c.mu = get_or(j, "mu", c.mu);
    c.rho_max = get_or(j, "rho_max", c.rho_max);
    c.max_iters = get_or(j, "max_iters", c.max_iters);
    c.tol_primal = get_or(j, "tol_primal", c.tol_primal);
    c.tol_change = get_or(j, "tol_change", c.tol_change);
    c.seed = get_or(j, "seed", c.seed);
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("solver config: ") + e.what());
  }
  if (j.contains("variant")) c.variant = variant_from_json(j.at("variant"));
  c.validate();
  return c;
}

json to_json(const SolverConfig& c) {
  return json{{"alpha", c.alpha},         {"beta", c.beta},
              {"gamma", c.gamma},         {"eta", c.eta},
              {"lambda1", c.lambda1},     {"lambda2", c.lambda2},
              {"rho0", c.rho0},           {"mu", c.mu},
              {"rho_max", c.rho_max},     {"max_iters", c.max_iters},
              {"tol_primal", c.tol_primal}, {"tol_change", c.tol_change},
              {"variant", std::string(variant_name(c.variant))}, {"seed", c.seed}};
}

ExperimentSpec experiment_spec_from_json(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown_keys(j, {"dataset", "bias", "degrade", "solver", "folds", "variants", "output_dir"},
                      "experiment spec");
  auto resolve = [&base_dir](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  ExperimentSpec s;
  try {
    const json& ds = j.at("dataset");
    reject_unknown_keys(ds, {"synth", "features", "distributions", "dir", "name"}, "dataset");
    s.dataset.name = get_or<std::string>(ds, "name", "");
    if (ds.contains("synth")) {
      const json& sy = ds.at("synth");
      reject_unknown_keys(sy, {"d", "m", "n", "rank", "seed"}, "dataset.synth");
      DatasetRef::Synth syn;
      syn.d = get_or(sy, "d", syn.d);
      syn.m = get_or(sy, "m", syn.m);
      syn.n = get_or(sy, "n", syn.n);
      syn.rank = get_or(sy, "rank", syn.rank);
      syn.seed = get_or(sy, "seed", syn.seed);
      s.dataset.synth = syn;
    } else if (ds.contains("dir")) {
      const auto dir = resolve(ds.at("dir").get<std::string>());
      s.dataset.features = dir / "features.csv";
      s.dataset.distributions = dir / "distributions.csv";
    } else {
      s.dataset.features = resolve(ds.at("features").get<std::string>());
      s.dataset.distributions = resolve(ds.at("distributions").get<std::string>());
    }
    if (j.contains("bias")) {
      const json& b = j.at("bias");
      reject_unknown_keys(b, {"c", "seed", "scheme"}, "bias");
      s.bias.c = get_or(b, "c", s.bias.c);
      s.bias.seed = get_or(b, "seed", s.bias.seed);
      if (b.contains("scheme") && b.at("scheme").get<std::string>() != "dirichlet_mix")
        throw InvalidConfig("bias.scheme: only dirichlet_mix is implemented");
    }
    if (j.contains("degrade")) {
      reject_unknown_keys(j.at("degrade"), {"threshold_t"}, "degrade");
      s.degrade.threshold_t = get_or(j.at("degrade"), "threshold_t", s.degrade.threshold_t);
    }
    if (j.contains("solver")) s.solver = solver_config_from_json(j.at("solver"));
    s.folds = get_or(j, "folds", s.folds);
    if (j.contains("variants")) {
      s.variants.clear();
      for (const auto& v : j.at("variants")) s.variants.push_back(variant_from_json(v));
    }
    if (j.contains("output_dir")) s.output_dir = resolve(j.at("output_dir").get<std::string>());
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("experiment spec: ") + e.what());
  }
  return s;
}

json to_json(const ExperimentSpec& s) {
  json ds;
  if (s.dataset.synth) {
    const auto& sy = *s.dataset.synth;
    ds["synth"] = {{"d", sy.d}, {"m", sy.m}, {"n", sy.n}, {"rank", sy.rank}, {"seed", sy.seed}};
  } else {
    ds["features"] = s.dataset.features.string();
    ds["distributions"] = s.dataset.distributions.string();
  }
  if (!s.dataset.name.empty()) ds["name"] = s.dataset.name;
  json variants = json::array();
  for (Variant v : s.variants) variants.push_back(std::string(variant_name(v)));
  return json{{"dataset", ds},
              {"bias", {{"c", s.bias.c}, {"seed", s.bias.seed}, {"scheme", "dirichlet_mix"}}},
              {"degrade", {{"threshold_t", s.degrade.threshold_t}}},
              {"solver", to_json(s.solver)},
              {"folds", s.folds},
              {"variants", variants}};
}

json to_json(const ScoreReport& r) {
  json metrics = json::object();
  for (const auto& [m, ms] : r.per_metric) metrics[std::string(metric_name(m))] = {{"mean", ms.mean}, {"std", ms.std}};
  return json{{"metrics", metrics}, {"n_instances", r.n_instances}};
}

json to_json(const ExperimentReport& r, const ExperimentSpec& spec) {
  json variants = json::object();
  for (const VariantOutcome& vo : r.variants) {
    json folds = json::array();
    for (const FoldOutcome& f : vo.folds)
      folds.push_back({{"fold", f.fold},
                       {"n_test", f.n_test},
                       {"scores", to_json(f.scores)},
                       {"converged", f.converged},
                       {"iters", f.iters},
                       {"recovered_error", f.recovered_error},
                       {"biased_error", f.biased_error}});
    variants[std::string(variant_name(vo.variant))] = {{"summary", to_json(vo.summary)}, {"folds", folds}};
  }
  return json{{"metadata", {{"generated_at", utc_timestamp()}, {"output_dir", spec.output_dir.string()}}},
              {"dataset", r.dataset},
              {"n_instances", r.n_instances},
              {"spec", to_json(spec)},
              {"variants", variants}};
}

// ---------------------------------------------------------------- experiment

Dataset DatasetRef::load() const {
  if (synth) {
    Dataset ds = synth_generate(synth->d, synth->m, synth->n, synth->rank, synth->seed);
    if (!name.empty()) ds.name = name;
    return ds;
  }
  return load_dataset(features, distributions, name);
}

void ExperimentSpec::validate(long n_instances) const {
  bias.validate();
  degrade.validate();
  solver.validate();
  if (folds < 2) throw InvalidConfig("folds must be at least 2");
  if (folds > n_instances) throw InvalidConfig("folds exceed the instance count");
  if (variants.empty()) throw InvalidConfig("no variants requested");
}

const VariantOutcome& ExperimentReport::at(Variant v) const {
  for (const auto& vo : variants)
    if (vo.variant == v) return vo;
  throw InvalidConfig("variant not in report: " + std::string(variant_name(v)));
}

std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, int folds, std::uint64_t seed) {
  const auto perm = seeded_permutation(n, seed);
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  const auto k = static_cast<std::size_t>(folds);
  for (std::size_t f = 0; f < k; ++f)
    out[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(f * n / k),
                  perm.begin() + static_cast<std::ptrdiff_t>((f + 1) * n / k));
  return out;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  const Dataset ds = spec.dataset.load();
  const long n = static_cast<long>(ds.X.instances());
  spec.validate(n);

  const auto test_blocks = fold_partition(static_cast<std::size_t>(n), spec.folds, spec.solver.seed);
  const std::size_t n_folds = test_blocks.size();

  struct FoldData {
    Matrix X_train, X_test;
    std::optional<DistributionMatrix> D_train, D_test, D_hat;
    std::optional<MultiLabelMatrix> L_hat;
  };
  std::vector<FoldData> folds(n_folds);
  for (std::size_t f = 0; f < n_folds; ++f) {
    std::vector<bool> in_test(static_cast<std::size_t>(n), false);
    for (std::size_t i : test_blocks[f]) in_test[i] = true;
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
      if (!in_test[i]) train.push_back(i);
    FoldData& fd = folds[f];
    fd.X_train = select_columns(ds.X.data(), train);
    fd.X_test = select_columns(ds.X.data(), test_blocks[f]);
    fd.D_train = validate_distribution(select_columns(ds.D.data(), train));
    fd.D_test = validate_distribution(select_columns(ds.D.data(), test_blocks[f]));
    BiasConfig bias = spec.bias;
    bias.seed = derive_seed(spec.bias.seed, {static_cast<std::uint64_t>(f)});
    fd.D_hat = inject_bias(*fd.D_train, bias);
    fd.L_hat = batch_degrade(*fd.D_hat, spec.degrade);
  }

  const std::size_t n_variants = spec.variants.size();
  const std::size_t n_tasks = n_folds * n_variants;
  std::vector<FoldOutcome> outcomes(n_tasks);
  std::vector<std::exception_ptr> failures(n_tasks);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < n_tasks; ++t) {
    const std::size_t f = t / n_variants;
    const std::size_t v = t % n_variants;
    try {
      const FoldData& fd = folds[f];
      SolverConfig cfg = spec.solver;
      cfg.variant = spec.variants[v];
      const FitResult fr = fit(FeatureMatrix(fd.X_train), *fd.D_hat, *fd.L_hat, cfg, fd.D_train,
                               spec.degrade.threshold_t);
      FoldOutcome& o = outcomes[t];
      o.fold = static_cast<int>(f);
      o.n_test = static_cast<long>(fd.X_test.cols());
      o.scores = score_report(*fd.D_test, predict(fr.W, fd.X_test));
      o.converged = fr.converged;
      o.iters = fr.iters_run;
      o.recovered_error = frobenius_distance(fr.D_recovered.data(), fd.D_train->data());
      o.biased_error = frobenius_distance(fd.D_hat->data(), fd.D_train->data());
      o.trace = fr.trace;
    } catch (...) {
      failures[t] = std::current_exception();
    }
  }
  for (std::size_t t = 0; t < n_tasks; ++t) {
    if (!failures[t]) continue;
    try {
      std::rethrow_exception(failures[t]);
    } catch (const Error& e) {
      const std::string ctx = " (fold " + std::to_string(t / n_variants) + ", variant " +
                              std::string(variant_name(spec.variants[t % n_variants])) + ")";
      throw Error(e.kind(), e.what() + ctx);
    }
  }

  ExperimentReport report;
  report.dataset = ds.name;
  report.n_instances = n;
  for (std::size_t v = 0; v < n_variants; ++v) {
    VariantOutcome vo;
    vo.variant = spec.variants[v];
    for (std::size_t f = 0; f < n_folds; ++f) vo.folds.push_back(std::move(outcomes[f * n_variants + v]));
    vo.summary = summarize_folds(vo.folds);
    report.variants.push_back(std::move(vo));
  }

  if (!spec.output_dir.empty()) {
    const auto& out = spec.output_dir;
    std::filesystem::create_directories(out / "traces");
    io::write_text(out / "report.json", to_json(report, spec).dump(2) + "\n");
    std::ostringstream scores, recovery;
    scores << "variant,metric,direction,mean,std\n";
    recovery << "variant,fold,recovered_error,biased_error,converged,iters\n";
    for (const VariantOutcome& vo : report.variants) {
      const std::string vname(variant_name(vo.variant));
      for (Metric m : kAllMetrics) {
        const MeanStd& ms = vo.summary.per_metric.at(m);
        scores << vname << ',' << metric_name(m) << ',' << (lower_is_better(m) ? "down" : "up") << ','
               << io::format_real(ms.mean) << ',' << io::format_real(ms.std) << '\n';
      }
      for (const FoldOutcome& f : vo.folds) {
        recovery << vname << ',' << f.fold << ',' << io::format_real(f.recovered_error) << ','
                 << io::format_real(f.biased_error) << ',' << (f.converged ? 1 : 0) << ',' << f.iters << '\n';
        std::ostringstream trace;
        write_trace_csv(trace, f.trace);
        io::write_text(out / "traces" / (vname + "_fold" + std::to_string(f.fold) + ".csv"), trace.str());
      }
    }
    io::write_text(out / "scores.csv", scores.str());
    io::write_text(out / "recovery.csv", recovery.str());
  }
  return report;
}

// ---------------------------------------------------------------- sensitivity

std::optional<SensitivityParam> parse_sensitivity_param(std::string_view name) noexcept {
  for (auto p : {SensitivityParam::Alpha, SensitivityParam::Beta, SensitivityParam::Eta, SensitivityParam::Lambda1})
    if (sensitivity_param_name(p) == name) return p;
  return std::nullopt;
}

std::string_view sensitivity_param_name(SensitivityParam p) noexcept {
  switch (p) {
    case SensitivityParam::Alpha: return "alpha";
    case SensitivityParam::Beta: return "beta";
    case SensitivityParam::Eta: return "eta";
    case SensitivityParam::Lambda1: return "lambda1";
  }
  return "";
}

std::vector<SensitivityRow> run_sensitivity(const ExperimentSpec& spec, SensitivityParam param,
                                            const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidConfig("sensitivity grid is empty");
  std::vector<SensitivityRow> rows;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    ExperimentSpec point = spec;
    switch (param) {
      case SensitivityParam::Alpha: point.solver.alpha = grid[g]; break;
      case SensitivityParam::Beta: point.solver.beta = grid[g]; break;
      case SensitivityParam::Eta: point.solver.eta = grid[g]; break;
      case SensitivityParam::Lambda1: point.solver.lambda1 = grid[g]; break;
    }
    if (!spec.output_dir.empty())
      point.output_dir = spec.output_dir / (std::string(sensitivity_param_name(param)) + "_" + std::to_string(g));
    const ExperimentReport rep = run_experiment(point);
    for (const VariantOutcome& vo : rep.variants) {
      SensitivityRow row;
      row.value = grid[g];
      row.variant = vo.variant;
      row.summary = vo.summary;
      row.all_converged = true;
      for (const auto& f : vo.folds) row.all_converged = row.all_converged && f.converged;
      rows.push_back(std::move(row));
    }
  }
  if (!spec.output_dir.empty()) {
    std::ostringstream csv;
    csv << "param,value,variant";
    for (Metric m : kAllMetrics) csv << ',' << metric_name(m) << "_mean," << metric_name(m) << "_std";
    csv << ",converged\n";
    json arr = json::array();
    for (const SensitivityRow& r : rows) {
      csv << sensitivity_param_name(param) << ',' << io::format_real(r.value) << ',' << variant_name(r.variant);
      for (Metric m : kAllMetrics)
        csv << ',' << io::format_real(r.summary.per_metric.at(m).mean) << ','
            << io::format_real(r.summary.per_metric.at(m).std);
      csv << ',' << (r.all_converged ? 1 : 0) << '\n';
      arr.push_back({{"param", std::string(sensitivity_param_name(param))},
                     {"value", r.value},
                     {"variant", std::string(variant_name(r.variant))},
                     {"summary", to_json(r.summary)},
                     {"converged", r.all_converged}});
    }
    io::write_text(spec.output_dir / "sensitivity.csv", csv.str());
    io::write_text(spec.output_dir / "sensitivity.json", json{{"rows", arr}}.dump(2) + "\n");
  }
  return rows;
}

// ---------------------------------------------------------------- stats

DatasetScores scores_from_report(const json& report) {
  DatasetScores ds;
  try {
    ds.dataset = report.at("dataset").get<std::string>();
    for (const auto& [vname, v] : report.at("variants").items()) {
      auto& slot = ds.methods[vname];
      for (const auto& [mname, ms] : v.at("summary").at("metrics").items()) {
        const auto m = parse_metric(mname);
        if (!m) throw InvalidConfig("report: unknown metric '" + mname + "'");
        slot[*m] = ms.at("mean").get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("report: ") + e.what());
  }
  return ds;
}

json emit_stats(const std::vector<DatasetScores>& reports, const std::string& control, double alpha,
                std::optional<double> q_alpha) {
  if (reports.size() < 2) throw InvalidConfig("stats: need at least 2 datasets");
  std::vector<std::string> methods;
  for (const auto& [name, _] : reports.front().methods) methods.push_back(name);
  if (methods.size() < 2) throw InvalidConfig("stats: need at least 2 methods");
  for (const auto& r : reports) {
    std::set<std::string> names;
    for (const auto& [name, _] : r.methods) names.insert(name);
    if (names != std::set<std::string>(methods.begin(), methods.end()))
      throw InvalidConfig("stats: dataset '" + r.dataset + "' reports a different method set");
  }
  const auto control_it = std::find(methods.begin(), methods.end(), control);
  if (control_it == methods.end()) throw InvalidConfig("stats: control method '" + control + "' not found");
  const auto control_col = static_cast<Eigen::Index>(control_it - methods.begin());

  const int k = static_cast<int>(methods.size());
  const int N = static_cast<int>(reports.size());
  if (!q_alpha) q_alpha = bonferroni_dunn_q(k, alpha);
  if (!q_alpha) throw InvalidConfig("stats: no bundled Bonferroni-Dunn q for this k/alpha; pass --q");
  const double cd = bonferroni_dunn_cd(k, N, *q_alpha);

  json datasets = json::array();
  for (const auto& r : reports) datasets.push_back(r.dataset);
  json records = json::array();
  for (Metric metric : kAllMetrics) {
    Matrix scores(N, k);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < k; ++j) {
        const auto& per = reports[static_cast<std::size_t>(i)].methods.at(methods[static_cast<std::size_t>(j)]);
        if (!per.count(metric)) throw InvalidConfig("stats: metric missing in '" + reports[static_cast<std::size_t>(i)].dataset + "'");
        scores(i, j) = per.at(metric);
      }
    const bool lower = lower_is_better(metric);
    const RankTable table = RankTable::from_scores(scores, methods, lower);
    const FriedmanResult fr = friedman(table);
    const double fcrit = f_critical(alpha, fr.df1, fr.df2);

    json mean_ranks = json::object();
    for (int j = 0; j < k; ++j) mean_ranks[methods[static_cast<std::size_t>(j)]] = fr.mean_ranks[static_cast<std::size_t>(j)];

    // Oriented so a positive difference means the control did better.
    const double sign = lower ? -1.0 : 1.0;
    std::vector<double> ctrl(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) ctrl[static_cast<std::size_t>(i)] = sign * scores(i, control_col);
    json pairwise = json::array();
    for (int j = 0; j < k; ++j) {
      if (j == control_col) continue;
      std::vector<double> other(static_cast<std::size_t>(N));
      for (int i = 0; i < N; ++i) other[static_cast<std::size_t>(i)] = sign * scores(i, j);
      json rec{{"method", methods[static_cast<std::size_t>(j)]}};
      try {
        const WilcoxonResult w = wilcoxon_signed_rank(ctrl, other);
        std::string outcome = "tie";
        if (w.p_two_sided < alpha) outcome = w.w_plus > w.w_minus ? "win" : "loss";
        rec.update({{"w_plus", w.w_plus}, {"w_minus", w.w_minus}, {"p_value", w.p_two_sided},
                    {"n_eff", w.n_eff}, {"exact", w.exact}, {"outcome", outcome}});
      } catch (const AllZeroDifferences&) {
        rec.update({{"w_plus", 0.0}, {"w_minus", 0.0}, {"p_value", 1.0}, {"n_eff", 0}, {"exact", true},
                    {"outcome", "tie"}, {"note", "all differences zero"}});
      }
      pairwise.push_back(rec);
    }

    json friedman_json{{"chi2", fr.chi2}, {"df1", fr.df1}, {"df2", fr.df2}, {"degenerate", fr.degenerate}};
    friedman_json["f_stat"] = fr.degenerate ? json("inf") : json(fr.f_stat);
    records.push_back({{"metric", std::string(metric_name(metric))},
                       {"direction", lower ? "down" : "up"},
                       {"mean_ranks", mean_ranks},
                       {"friedman", friedman_json},
                       {"f_critical", fcrit},
                       {"reject_null", fr.degenerate || fr.f_stat > fcrit},
                       {"critical_difference", cd},
                       {"wilcoxon", pairwise}});
  }
  return json{{"alpha", alpha}, {"control", control}, {"k", k}, {"n_datasets", N},
              {"q_alpha", *q_alpha}, {"datasets", datasets}, {"metrics", records}};
}

}  // namespace bldl
