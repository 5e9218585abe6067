#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scifactor/config.hpp"
#include "scifactor/corpus.hpp"
#include "scifactor/reports.hpp"

namespace scifactor {

struct CorpusPaths {
  std::filesystem::path papers;
  std::filesystem::path institutions;
  std::optional<std::filesystem::path> gdp;

  // papers.jsonl, institutions.jsonl and gdp.csv (if present) inside `dir`.
  static CorpusPaths in_directory(const std::filesystem::path& dir);
};

Corpus load_corpus(const CorpusPaths& paths);

struct PipelineOptions {
  RunConfig config;
  std::filesystem::path out_dir = "out";
  std::optional<CorpusPaths> corpus;  // synthesized from config.synth when absent
  unsigned threads = 1;
  std::ostream* log = nullptr;
};

struct ModelRun {
  LearnerKind learner;
  int delta_t;
  Hyperparams hyperparams;
  std::optional<GridSearchResult> grid;
  MetricsReport test_metrics;
};

struct PipelineResult {
  std::vector<ModelRun> runs;
  std::size_t primary_run = 0;
  JackknifeReport jackknife;
  Importance importance;
  GiniReport gini;
  std::size_t feature_rows = 0;
  nlohmann::ordered_json summary;
  std::vector<std::string> files;  // relative to out_dir, in write order
};

// Fitted model plus grid search on the training rows, as the train command
// and the pipeline do it. Grid search is skipped when the grid is empty.
struct TrainOutcome {
  TrainedModel model;
  Hyperparams hyperparams;
  std::optional<GridSearchResult> grid;
};
TrainOutcome train_with_grid(LearnerKind learner, const Hyperparams& base, const Grid& grid,
                             const DesignMatrix& x, std::span<const double> y, std::size_t folds,
                             std::uint64_t fold_seed, double tolerance, unsigned threads);

// synth (optional) -> features -> grid-searched training -> held-out
// evaluation -> jackknife -> importance -> gini, writing every report plus
// summary.json under out_dir.
PipelineResult run_pipeline(const PipelineOptions& options);

// Writes `text` to out_dir/name, creating out_dir.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace scifactor
