// scifactor command-line interface.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "scifactor/error.hpp"
#include "scifactor/pipeline.hpp"
#include "scifactor/rng.hpp"

using namespace scifactor;

namespace {

constexpr const char* kCorpusSchema = R"(
Corpus files:
  papers.jsonl        one JSON object per line: {"id", "title", "year", "venue",
                      "keywords": [..], "authors": [{"id", "name", "institution"}],
                      "references": [paper ids]}
  institutions.jsonl  {"id", "name", "country"} per line
  gdp.csv             header "country,gdp"; one positive value per country)";

constexpr const char* kFeatureSchema = R"(
Feature file (features.csv):
  header "author_id,<feature columns>,target"; one row per author; the target
  column holds the target-year h-index (empty when unknown).)";

constexpr const char* kConfigSchema = R"(
Config file (TOML subset):
  top level    cutoff_year, target_year, delta_t, eval_delta_ts, learner,
               eval_learners, acc_tolerance, venue_score ("pagerank"|"eq4_sum"),
               include_pr_pub, seed, folds, test_fraction
  [hyperparams] and [hyperparams.<learner>]
               learning_rate, max_depth, n_trees, subsample, colsample,
               l2_reg (lambda), leaf_penalty (gamma), min_samples_leaf, seed
  [grid] and [grid.<learner>]   hyperparameter = [values, ...]
  [synth]      n_authors, n_venues, n_institutions, n_keywords, start_year,
               end_year, papers_per_author_year, team_size, pa_strength,
               refs_per_paper, seed
Command-line flags override file values.)";

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out_dir = "out";
};

struct CorpusFlags {
  std::string dir;
  std::string papers;
  std::string institutions;
  std::string gdp;

  std::optional<CorpusPaths> paths() const {
    if (!dir.empty()) {
      if (!papers.empty() || !institutions.empty()) {
        throw ConfigError("use either --corpus-dir or --papers/--institutions, not both");
      }
      auto p = CorpusPaths::in_directory(dir);
      if (!gdp.empty()) p.gdp = gdp;
      return p;
    }
    if (papers.empty() && institutions.empty()) return std::nullopt;
    if (papers.empty() || institutions.empty()) {
      throw ConfigError("--papers and --institutions must be given together");
    }
    CorpusPaths p{papers, institutions, std::nullopt};
    if (!gdp.empty()) p.gdp = gdp;
    return p;
  }

  CorpusPaths required() const {
    auto p = paths();
    if (!p) throw ConfigError("a corpus is required (--corpus-dir or --papers/--institutions)");
    return *p;
  }
};

struct RunFlags {
  std::optional<int> cutoff;
  std::optional<int> target;
  std::optional<int> delta_t;
  std::optional<std::string> learner;
  std::optional<double> tolerance;
  std::optional<std::string> venue_score;
  bool pr_pub = false;
  std::optional<std::size_t> folds;
  std::optional<double> test_fraction;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Config file (TOML subset)");
  cmd->add_option("--seed", c.seed, "Root seed; sub-seeds are derived per component");
  cmd->add_option("--threads", c.threads, "Worker cap; outputs do not depend on it")
      ->check(CLI::Range(1U, 1024U));
  cmd->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
}

void add_corpus(CLI::App* cmd, CorpusFlags& f) {
  cmd->add_option("--corpus-dir", f.dir, "Directory holding papers.jsonl, institutions.jsonl, gdp.csv");
  cmd->add_option("--papers", f.papers, "papers.jsonl path");
  cmd->add_option("--institutions", f.institutions, "institutions.jsonl path");
  cmd->add_option("--gdp", f.gdp, "gdp.csv path");
}

void add_years(CLI::App* cmd, RunFlags& r) {
  cmd->add_option("--cutoff", r.cutoff, "Feature snapshot year");
  cmd->add_option("--target", r.target, "Target h-index year");
  cmd->add_option("--delta-t", r.delta_t, "Feature window in years");
}

void add_feature_opts(CLI::App* cmd, RunFlags& r) {
  cmd->add_option("--venue-score", r.venue_score, "pagerank or eq4_sum");
  cmd->add_flag("--pr-pub", r.pr_pub, "Append the PR_pub column");
}

RunConfig resolve(const Common& c, const RunFlags& r) {
  RunConfig cfg;
  if (!c.config.empty()) cfg = apply_config(ConfigFile::load(c.config));
  if (c.seed) cfg.seed = *c.seed;
  if (r.cutoff) cfg.cutoff_year = *r.cutoff;
  if (r.target) cfg.target_year = *r.target;
  if (r.delta_t) {
    cfg.delta_t = *r.delta_t;
    cfg.eval_delta_ts.clear();
  }
  if (r.learner) {
    const auto kind = parse_learner(*r.learner);
    if (!kind) throw ConfigError("unknown learner '" + *r.learner + "'");
    cfg.learner = *kind;
    cfg.eval_learners.clear();
  }
  if (r.tolerance) cfg.acc_tolerance = *r.tolerance;
  if (r.venue_score) {
    if (*r.venue_score == "pagerank") {
      cfg.venue_score = VenueScore::PageRank;
    } else if (*r.venue_score == "eq4_sum") {
      cfg.venue_score = VenueScore::Eq4Sum;
    } else {
      throw ConfigError("--venue-score must be pagerank or eq4_sum");
    }
  }
  if (r.pr_pub) cfg.include_pr_pub = true;
  if (r.folds) cfg.folds = *r.folds;
  if (r.test_fraction) cfg.test_fraction = *r.test_fraction;
  return cfg;
}

std::filesystem::path out_path(const Common& c, const std::string& name) {
  return std::filesystem::path(c.out_dir) / name;
}

template <typename Fn>
void write_report(const Common& c, const std::string& name, Fn&& fn) {
  std::ostringstream s;
  fn(s);
  write_text_file(out_path(c, name), s.str());
  std::cerr << "wrote " << out_path(c, name).string() << '\n';
}

FeatureMatrix read_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature file " + path);
  return read_feature_csv(in);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void require_targets(const FeatureMatrix& m) {
  if (m.target.size() != m.rows()) throw DataError("feature file has no target column values");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scifactor: scholarly success factor analysis"};
  app.require_subcommand(1);
  app.footer(std::string(kCorpusSchema) + "\n" + kFeatureSchema + "\n" + kConfigSchema);

  Common common;
  CorpusFlags corpus_flags;
  RunFlags run;
  std::string features_path;
  std::string model_path;
  std::string grid_path;
  std::optional<std::size_t> synth_authors;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus into --out-dir");
  add_common(synth, common);
  synth->add_option("--authors", synth_authors, "Number of authors (overrides [synth])");
  synth->footer(kCorpusSchema);

  auto* features = app.add_subcommand("features", "Extract the factor matrix (features.csv)");
  add_common(features, common);
  add_corpus(features, corpus_flags);
  add_years(features, run);
  add_feature_opts(features, run);
  features->footer(std::string(kCorpusSchema) + "\n" + kFeatureSchema);

  auto* correlate = app.add_subcommand("correlate", "Pearson correlation of each factor with the target (correlations.csv)");
  add_common(correlate, common);
  correlate->add_option("--features", features_path, "features.csv path")->required();
  correlate->footer(std::string(kFeatureSchema) + "\nOutput correlations.csv: feature,group,pearson");

  auto* train = app.add_subcommand("train", "Fit a learner, optionally grid-searched (model.json, cv.csv)");
  add_common(train, common);
  train->add_option("--features", features_path, "features.csv path")->required();
  train->add_option("--learner", run.learner, "lr, cart, gbdt or xgb");
  train->add_option("--grid", grid_path, "Config file whose [grid] sections define the search");
  train->add_option("--folds", run.folds, "Cross-validation folds");
  train->add_option("--tolerance", run.tolerance, "ACC tolerance");
  train->footer(std::string(kFeatureSchema) + "\n" + kConfigSchema +
                "\nOutputs: model.json (model_type, feature_names, hyperparams, seed, payload);"
                "\n  cv.csv: learner,delta_t,cell,params,status,mean_mse,mae,mape,mse,acc,r2,selected");

  auto* evaluate = app.add_subcommand("evaluate", "Score a model on a feature file (metrics.csv)");
  add_common(evaluate, common);
  evaluate->add_option("--model", model_path, "model.json path")->required();
  evaluate->add_option("--features", features_path, "features.csv path")->required();
  evaluate->add_option("--tolerance", run.tolerance, "ACC tolerance");
  evaluate->add_option("--delta-t", run.delta_t, "Delta t label for the report row");
  evaluate->footer(std::string(kFeatureSchema) +
                   "\nOutput metrics.csv: learner,delta_t,n,mae,mape,mse,acc,r2,acc_tolerance,"
                   "excluded_zero_targets");

  auto* jk = app.add_subcommand("jackknife", "Adding/Removing ablation per factor group (jackknife.csv)");
  add_common(jk, common);
  jk->add_option("--features", features_path, "features.csv path")->required();
  jk->add_option("--learner", run.learner, "lr, cart, gbdt or xgb");
  jk->add_option("--tolerance", run.tolerance, "ACC tolerance");
  jk->add_option("--test-fraction", run.test_fraction, "Held-out share of rows");
  jk->footer(std::string(kFeatureSchema) +
             "\nOutput jackknife.csv: phase,group,n_columns,n,mae,mape,mse,acc,r2,acc_tolerance");

  auto* imp = app.add_subcommand("importance", "Split-count importance of a model (importance.csv)");
  add_common(imp, common);
  imp->add_option("--model", model_path, "model.json path")->required();
  imp->footer("Output importance.csv: level,name,group,measure,value (group rows are percent)");

  auto* gini = app.add_subcommand("gini", "Institution Gini cohorts (gini.csv)");
  add_common(gini, common);
  add_corpus(gini, corpus_flags);
  gini->add_option("--cutoff", run.cutoff, "Snapshot year");
  gini->footer(std::string(kCorpusSchema) +
               "\nOutput gini.csv: cohort,institutions,papers,citations,h_index");

  auto* pipeline = app.add_subcommand("pipeline", "synth (unless a corpus is given) through every report");
  add_common(pipeline, common);
  add_corpus(pipeline, corpus_flags);
  add_years(pipeline, run);
  add_feature_opts(pipeline, run);
  pipeline->add_option("--learner", run.learner, "lr, cart, gbdt or xgb");
  pipeline->add_option("--tolerance", run.tolerance, "ACC tolerance");
  pipeline->footer(std::string(kCorpusSchema) + "\n" + kConfigSchema +
                   "\nOutputs: features.csv correlations.csv metrics.csv cv.csv model.json"
                   "\n  jackknife.csv importance.csv gini.csv summary.json (+ corpus/ when synthesized)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    auto cfg = resolve(common, run);
    if (synth->parsed()) {
      auto s = cfg.synth_config();
      if (synth_authors) s.n_authors = *synth_authors;
      const auto corpus = generate(s);
      for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << '\n';
      write_synth(corpus, common.out_dir);
      std::cerr << "wrote " << corpus.papers.size() << " papers to " << common.out_dir << '\n';
    } else if (features->parsed()) {
      cfg.validate();
      const auto corpus = load_corpus(corpus_flags.required());
      const auto m = extract_matrix(corpus, cfg.cutoff_year, cfg.delta_t, cfg.target_year,
                                    cfg.feature_config(common.threads));
      write_report(common, "features.csv", [&](std::ostream& s) { write_feature_csv(s, m); });
    } else if (correlate->parsed()) {
      const auto m = read_features(features_path);
      write_report(common, "correlations.csv",
                   [&](std::ostream& s) { write_correlations_csv(s, correlation_table(m)); });
    } else if (train->parsed()) {
      if (!grid_path.empty()) {
        const auto g = apply_config(ConfigFile::load(grid_path));
        cfg.grid = g.grid;
        cfg.learner_grid = g.learner_grid;
      }
      cfg.validate();
      const auto m = read_features(features_path);
      require_targets(m);
      const auto out = train_with_grid(cfg.learner, cfg.hyperparams_for(cfg.learner),
                                       cfg.grid_for(cfg.learner), m.features, m.target, cfg.folds,
                                       cfg.fold_seed(), cfg.acc_tolerance, common.threads);
      write_text_file(out_path(common, "model.json"), out.model.serialize());
      std::cerr << "wrote " << out_path(common, "model.json").string() << '\n';
      std::vector<CvTable> tables;
      if (out.grid) tables.push_back({std::string(learner_name(cfg.learner)), cfg.delta_t, *out.grid});
      write_report(common, "cv.csv", [&](std::ostream& s) { write_cv_csv(s, tables); });
    } else if (evaluate->parsed()) {
      const auto model = TrainedModel::deserialize(read_file(model_path));
      const auto m = read_features(features_path);
      require_targets(m);
      if (m.features.names() != model.feature_names()) {
        throw DataError("feature columns do not match the model's feature list");
      }
      const auto report = metrics(m.target, predict(model, m.features), cfg.acc_tolerance);
      std::vector<MetricsRow> rows{{std::string(learner_name(model.kind())), cfg.delta_t, report}};
      write_report(common, "metrics.csv", [&](std::ostream& s) { write_metrics_csv(s, rows); });
    } else if (jk->parsed()) {
      cfg.validate();
      const auto m = read_features(features_path);
      require_targets(m);
      const auto split = holdout_split(m.rows(), cfg.test_fraction, cfg.holdout_seed());
      const auto report = jackknife(cfg.learner, cfg.hyperparams_for(cfg.learner), m, split,
                                    cfg.acc_tolerance, common.threads);
      write_report(common, "jackknife.csv", [&](std::ostream& s) { write_jackknife_csv(s, report); });
    } else if (imp->parsed()) {
      const auto model = TrainedModel::deserialize(read_file(model_path));
      const auto result = importance(model);
      write_report(common, "importance.csv",
                   [&](std::ostream& s) { write_importance_csv(s, result); });
    } else if (gini->parsed()) {
      const auto corpus = load_corpus(corpus_flags.required());
      const auto report = gini_report(snapshot(corpus, cfg.cutoff_year));
      write_report(common, "gini.csv", [&](std::ostream& s) { write_gini_csv(s, report); });
    } else if (pipeline->parsed()) {
      PipelineOptions options;
      options.config = cfg;
      options.out_dir = common.out_dir;
      options.corpus = corpus_flags.paths();
      options.threads = common.threads;
      options.log = &std::cerr;
      run_pipeline(options);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
