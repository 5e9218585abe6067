#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scifactor/catalog.hpp"
#include "scifactor/corpus.hpp"
#include "scifactor/features.hpp"
#include "scifactor/learners.hpp"

namespace scifactor {

struct MetricsReport {
  double mae = 0;
  double mape = 0;  // percent
  double mse = 0;
  double acc = 0;
  double r2 = 0;
  std::size_t n = 0;
  double acc_tolerance = 1.0;
  std::size_t excluded_zero_targets = 0;
};

// MAE, MSE and R^2 use every row; MAPE and ACC skip rows with y == 0.
// ACC is the share of rows with |yhat - y| <= tolerance. When every target is
// identical R^2 is 1 for a perfect fit and 0 otherwise.
MetricsReport metrics(std::span<const double> y, std::span<const double> yhat,
                      double tolerance = 1.0);

// k contiguous folds over a seeded shuffle of [0, n); the first n % k folds
// hold one extra row. Indices inside a fold are sorted.
std::vector<std::vector<std::size_t>> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
// Holds out round(test_fraction * n) rows (at least one on each side).
TrainTestSplit holdout_split(std::size_t n, double test_fraction, std::uint64_t seed);

using Grid = std::map<std::string, std::vector<double>>;

struct GridCell {
  std::vector<std::pair<std::string, double>> point;
  Hyperparams hyperparams;
  bool failed = false;
  std::string error;
  double mean_mse = 0;    // mean of per-fold validation MSE
  MetricsReport pooled;   // over all out-of-fold predictions
};

struct GridSearchResult {
  Hyperparams best;
  std::size_t best_index = 0;
  std::vector<GridCell> cells;  // enumeration order
};

// Cartesian product over keys in sorted order (first key varies slowest),
// values in the given order. The lowest mean MSE wins; earlier cells win ties.
// Throws ConfigError for an empty grid, DataError when every cell fails.
GridSearchResult grid_search(LearnerKind learner, const Grid& grid, const Hyperparams& base,
                             const DesignMatrix& x, std::span<const double> y, std::size_t k,
                             std::uint64_t fold_seed, double tolerance = 1.0,
                             unsigned threads = 1);

enum class Phase { Adding, Removing };
std::string_view phase_name(Phase phase);

struct JackknifeRow {
  FactorGroup group;
  Phase phase;
  std::vector<std::string> columns;
  MetricsReport metrics;
};

struct JackknifeReport {
  MetricsReport baseline;
  std::vector<JackknifeRow> rows;  // group order, Adding before Removing
};

JackknifeReport jackknife(LearnerKind learner, const Hyperparams& hp, const FeatureMatrix& matrix,
                          const TrainTestSplit& split, double tolerance = 1.0,
                          unsigned threads = 1);

struct CorrelationRow {
  std::string feature;
  FactorGroup group;
  std::optional<double> r;  // absent for constant columns
};

// Pearson correlation of each feature with the target, in column order.
std::vector<CorrelationRow> correlation_table(const FeatureMatrix& matrix);

enum class GiniMetric { Papers, Citations, HIndex };
inline constexpr std::array<GiniMetric, 3> kGiniMetrics = {GiniMetric::Papers,
                                                           GiniMetric::Citations,
                                                           GiniMetric::HIndex};
std::string_view gini_metric_name(GiniMetric metric);

struct GiniCohort {
  std::string name;  // "top5", "top10", "top20", "last10"
  std::vector<std::string> institutions;
  std::array<double, 3> mean_gini{};  // indexed by GiniMetric
};

struct GiniReport {
  std::vector<std::string> ranking;  // institution ids, most authors first
  std::vector<GiniCohort> cohorts;
};

// Ranks institutions with at least one author by author count (ties by id).
// Throws DataError when no institution has authors.
GiniReport gini_report(const CorpusSnapshot& snap);

}  // namespace scifactor
