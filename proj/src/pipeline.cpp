#include "scifactor/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "scifactor/error.hpp"
#include "scifactor/synth.hpp"

namespace scifactor {

using nlohmann::ordered_json;

CorpusPaths CorpusPaths::in_directory(const std::filesystem::path& dir) {
  CorpusPaths p;
  p.papers = dir / "papers.jsonl";
  p.institutions = dir / "institutions.jsonl";
  if (std::filesystem::exists(dir / "gdp.csv")) p.gdp = dir / "gdp.csv";
  return p;
}

Corpus load_corpus(const CorpusPaths& paths) {
  return load_corpus(paths.papers, paths.institutions, paths.gdp);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

TrainOutcome train_with_grid(LearnerKind learner, const Hyperparams& base, const Grid& grid,
                             const DesignMatrix& x, std::span<const double> y, std::size_t folds,
                             std::uint64_t fold_seed, double tolerance, unsigned threads) {
  std::optional<GridSearchResult> search;
  Hyperparams hp = base;
  if (!grid.empty()) {
    search = grid_search(learner, grid, base, x, y, folds, fold_seed, tolerance, threads);
    hp = search->best;
  }
  auto model = fit(learner, x, y, hp);
  return {std::move(model), hp, std::move(search)};
}

namespace {

ordered_json metrics_json(const MetricsReport& m) {
  return ordered_json{{"n", m.n},
                      {"mae", m.mae},
                      {"mape", m.mape},
                      {"mse", m.mse},
                      {"acc", m.acc},
                      {"r2", m.r2},
                      {"acc_tolerance", m.acc_tolerance},
                      {"excluded_zero_targets", m.excluded_zero_targets}};
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

}  // namespace

PipelineResult run_pipeline(const PipelineOptions& options) {
  const auto& cfg = options.config;
  cfg.validate();
  PipelineResult result;
  const auto& dir = options.out_dir;
  const auto emit = [&](const std::string& name, const std::string& text) {
    write_text_file(dir / name, text);
    result.files.push_back(name);
    if (options.log) *options.log << "wrote " << (dir / name).string() << '\n';
  };

  // Corpus.
  Corpus corpus = [&] {
    if (options.corpus) return load_corpus(*options.corpus);
    const auto synth = generate(cfg.synth_config());
    for (const auto& w : synth.warnings) {
      if (options.log) *options.log << "synth warning: " << w << '\n';
    }
    write_synth(synth, dir / "corpus");
    for (const char* f : {"papers.jsonl", "institutions.jsonl", "gdp.csv"}) {
      result.files.push_back(std::string("corpus/") + f);
    }
    return synth.to_corpus();
  }();
  if (options.log) {
    *options.log << "corpus: " << corpus.paper_count() << " papers, " << corpus.author_count()
                 << " authors, " << corpus.load_report().warning_count() << " load warnings\n";
  }

  auto delta_ts = cfg.delta_ts();
  if (std::find(delta_ts.begin(), delta_ts.end(), cfg.delta_t) == delta_ts.end()) {
    delta_ts.insert(delta_ts.begin(), cfg.delta_t);
  }
  auto learners = cfg.learners();
  if (std::find(learners.begin(), learners.end(), cfg.learner) == learners.end()) {
    learners.insert(learners.begin(), cfg.learner);
  }
  const auto feature_cfg = cfg.feature_config(options.threads);

  std::vector<MetricsRow> metric_rows;
  std::vector<CvTable> cv_tables;
  std::optional<FeatureMatrix> primary_matrix;
  std::optional<TrainTestSplit> primary_split;
  std::optional<TrainedModel> primary_model;

  for (const int dt : delta_ts) {
    auto matrix = extract_matrix(corpus, cfg.cutoff_year, dt, cfg.target_year, feature_cfg);
    if (options.log) *options.log << "features (delta_t=" << dt << "): " << matrix.rows() << " rows\n";
    const auto split = holdout_split(matrix.rows(), cfg.test_fraction, cfg.holdout_seed());
    const auto train_x = matrix.features.take_rows(split.train);
    const auto test_x = matrix.features.take_rows(split.test);
    const auto train_y = take(std::span<const double>(matrix.target),
                              std::span<const std::size_t>(split.train));
    const auto test_y = take(std::span<const double>(matrix.target),
                             std::span<const std::size_t>(split.test));
    for (const auto kind : learners) {
      auto outcome = train_with_grid(kind, cfg.hyperparams_for(kind), cfg.grid_for(kind), train_x,
                                     train_y, cfg.folds, cfg.fold_seed(), cfg.acc_tolerance,
                                     options.threads);
      const auto m = metrics(test_y, predict(outcome.model, test_x), cfg.acc_tolerance);
      if (options.log) {
        *options.log << learner_name(kind) << " delta_t=" << dt << ": r2=" << m.r2
                     << " acc=" << m.acc << " mae=" << m.mae << '\n';
      }
      metric_rows.push_back({std::string(learner_name(kind)), dt, m});
      if (outcome.grid) cv_tables.push_back({std::string(learner_name(kind)), dt, *outcome.grid});
      const bool primary = kind == cfg.learner && dt == cfg.delta_t;
      if (primary) {
        result.primary_run = result.runs.size();
        primary_model = outcome.model;
      }
      result.runs.push_back({kind, dt, outcome.hyperparams, std::move(outcome.grid), m});
    }
    if (dt == cfg.delta_t) {
      primary_matrix = std::move(matrix);
      primary_split = split;
    }
  }

  const auto& matrix = *primary_matrix;
  result.feature_rows = matrix.rows();
  emit("features.csv", render([&](std::ostream& s) { write_feature_csv(s, matrix); }));
  emit("correlations.csv",
       render([&](std::ostream& s) { write_correlations_csv(s, correlation_table(matrix)); }));
  emit("metrics.csv", render([&](std::ostream& s) { write_metrics_csv(s, metric_rows); }));
  emit("cv.csv", render([&](std::ostream& s) { write_cv_csv(s, cv_tables); }));
  emit("model.json", primary_model->serialize());

  const auto& primary = result.runs[result.primary_run];
  result.jackknife = jackknife(cfg.learner, primary.hyperparams, matrix, *primary_split,
                               cfg.acc_tolerance, options.threads);
  emit("jackknife.csv", render([&](std::ostream& s) { write_jackknife_csv(s, result.jackknife); }));

  result.importance = importance(*primary_model);
  emit("importance.csv",
       render([&](std::ostream& s) { write_importance_csv(s, result.importance); }));

  result.gini = gini_report(snapshot(corpus, cfg.cutoff_year));
  emit("gini.csv", render([&](std::ostream& s) { write_gini_csv(s, result.gini); }));

  // Summary.
  ordered_json summary;
  summary["config"] = {{"cutoff_year", cfg.cutoff_year},
                       {"target_year", cfg.target_year},
                       {"delta_t", cfg.delta_t},
                       {"learner", std::string(learner_name(cfg.learner))},
                       {"seed", cfg.seed},
                       {"acc_tolerance", cfg.acc_tolerance},
                       {"venue_score", cfg.venue_score == VenueScore::PageRank ? "pagerank" : "eq4_sum"},
                       {"include_pr_pub", cfg.include_pr_pub},
                       {"folds", cfg.folds},
                       {"test_fraction", cfg.test_fraction}};
  const auto& report = corpus.load_report();
  summary["corpus"] = {{"synthesized", !options.corpus.has_value()},
                       {"papers", corpus.paper_count()},
                       {"authors", corpus.author_count()},
                       {"venues", corpus.venue_count()},
                       {"institutions", corpus.institution_count()},
                       {"citation_edges", corpus.citation_edge_count()},
                       {"min_year", corpus.min_year()},
                       {"max_year", corpus.max_year()},
                       {"load_warnings", report.warning_count()}};
  summary["features"] = {{"rows", matrix.rows()},
                         {"columns", matrix.features.cols()},
                         {"unaffiliated_authors", matrix.warnings.unaffiliated_authors},
                         {"missing_gdp", matrix.warnings.missing_gdp}};
  ordered_json runs = ordered_json::array();
  for (const auto& r : result.runs) {
    ordered_json run;
    run["learner"] = std::string(learner_name(r.learner));
    run["delta_t"] = r.delta_t;
    run["hyperparams"] = r.hyperparams.to_json();
    run["grid_cells"] = r.grid ? r.grid->cells.size() : 0;
    run["test"] = metrics_json(r.test_metrics);
    runs.push_back(std::move(run));
  }
  summary["runs"] = std::move(runs);
  ordered_json jk;
  jk["baseline"] = metrics_json(result.jackknife.baseline);
  ordered_json jk_rows = ordered_json::array();
  for (const auto& r : result.jackknife.rows) {
    jk_rows.push_back({{"phase", std::string(phase_name(r.phase))},
                       {"group", std::string(group_name(r.group))},
                       {"metrics", metrics_json(r.metrics)}});
  }
  jk["rows"] = std::move(jk_rows);
  summary["jackknife"] = std::move(jk);
  ordered_json shares = ordered_json::object();
  for (const auto& [g, share] : result.importance.group_shares) shares[std::string(group_name(g))] = share;
  summary["importance_group_shares"] = std::move(shares);
  ordered_json gini = ordered_json::array();
  for (const auto& c : result.gini.cohorts) {
    gini.push_back({{"cohort", c.name},
                    {"institutions", c.institutions.size()},
                    {"papers", c.mean_gini[0]},
                    {"citations", c.mean_gini[1]},
                    {"h_index", c.mean_gini[2]}});
  }
  summary["gini"] = std::move(gini);
  auto files = result.files;
  files.push_back("summary.json");
  summary["files"] = files;
  result.summary = summary;
  emit("summary.json", summary.dump(2) + "\n");
  return result;
}

}  // namespace scifactor
