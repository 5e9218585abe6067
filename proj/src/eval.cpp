#include "scifactor/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scifactor/error.hpp"
#include "scifactor/parallel.hpp"
#include "scifactor/rng.hpp"
#include "scifactor/scimetrics.hpp"

namespace scifactor {

MetricsReport metrics(std::span<const double> y, std::span<const double> yhat, double tolerance) {
  if (y.size() != yhat.size()) throw DataError("metrics: target and prediction lengths differ");
  if (y.empty()) throw DataError("metrics: no rows to evaluate");
  if (!(tolerance >= 0.0)) throw ConfigError("acc tolerance must be >= 0");
  MetricsReport m;
  m.n = y.size();
  m.acc_tolerance = tolerance;
  const double n = static_cast<double>(y.size());
  double abs_sum = 0;
  double sq_sum = 0;
  double ape_sum = 0;
  std::size_t hits = 0;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = yhat[i] - y[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    if (y[i] == 0.0) continue;
    ++nonzero;
    ape_sum += std::abs(e / y[i]);
    if (std::abs(e) <= tolerance) ++hits;
  }
  if (nonzero == 0) throw DataError("metrics: every target is zero; MAPE and ACC are undefined");
  m.excluded_zero_targets = y.size() - nonzero;
  m.mae = abs_sum / n;
  m.mse = sq_sum / n;
  m.mape = 100.0 * ape_sum / static_cast<double>(nonzero);
  m.acc = static_cast<double>(hits) / static_cast<double>(nonzero);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss_tot = 0;
  for (const double v : y) ss_tot += (v - mean) * (v - mean);
  if (ss_tot == 0.0) {
    m.r2 = sq_sum == 0.0 ? 1.0 : 0.0;
  } else {
    m.r2 = 1.0 - sq_sum / ss_tot;
  }
  return m;
}

std::vector<std::vector<std::size_t>> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("kfold: k must be >= 2");
  if (k > n) {
    throw ConfigError("kfold: k = " + std::to_string(k) + " exceeds row count " + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed, "kfold");
  rng.shuffle(std::span<std::size_t>(perm));
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

TrainTestSplit holdout_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must be in (0, 1)");
  }
  if (n < 2) throw DataError("holdout split needs at least 2 rows");
  auto m = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  m = std::clamp<std::size_t>(m, 1, n - 1);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed, "holdout");
  rng.shuffle(std::span<std::size_t>(perm));
  TrainTestSplit split;
  split.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
  split.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(m), perm.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

namespace {

std::vector<std::size_t> complement(std::size_t n, std::span<const std::size_t> subset) {
  std::vector<char> in(n, 0);
  for (const auto i : subset) in[i] = 1;
  std::vector<std::size_t> out;
  out.reserve(n - subset.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

GridSearchResult grid_search(LearnerKind learner, const Grid& grid, const Hyperparams& base,
                             const DesignMatrix& x, std::span<const double> y, std::size_t k,
                             std::uint64_t fold_seed, double tolerance, unsigned threads) {
  if (grid.empty()) throw ConfigError("grid search: empty grid");
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw ConfigError("grid search: no values for '" + key + "'");
  }
  if (x.rows() != y.size()) throw DataError("grid search: row count differs from target");

  GridSearchResult result;
  std::vector<std::size_t> digit(grid.size(), 0);
  while (true) {
    GridCell cell;
    cell.hyperparams = base;
    std::size_t d = 0;
    for (const auto& [key, values] : grid) {
      cell.hyperparams.set(key, values[digit[d]]);
      cell.point.emplace_back(key, values[digit[d]]);
      ++d;
    }
    result.cells.push_back(std::move(cell));
    std::size_t pos = grid.size();
    auto it = grid.end();
    bool done = true;
    while (pos > 0) {
      --pos;
      --it;
      if (++digit[pos] < it->second.size()) {
        done = false;
        break;
      }
      digit[pos] = 0;
    }
    if (done) break;
  }

  const auto folds = kfold(x.rows(), k, fold_seed);
  const std::size_t cells = result.cells.size();
  struct FoldOutcome {
    std::vector<double> predictions;
    std::string error;
  };
  std::vector<FoldOutcome> outcomes(cells * k);
  parallel_for(cells * k, threads, [&](std::size_t task) {
    const auto& cell = result.cells[task / k];
    const auto& valid = folds[task % k];
    auto& out = outcomes[task];
    try {
      const auto train = complement(x.rows(), valid);
      const auto ytrain = take(y, std::span<const std::size_t>(train));
      const auto model = fit(learner, x.take_rows(train), ytrain, cell.hyperparams);
      out.predictions = predict(model, x.take_rows(valid));
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  bool any = false;
  for (std::size_t c = 0; c < cells; ++c) {
    auto& cell = result.cells[c];
    std::vector<double> pooled(x.rows(), 0.0);
    double mse_sum = 0.0;
    for (std::size_t f = 0; f < k && !cell.failed; ++f) {
      const auto& out = outcomes[c * k + f];
      if (!out.error.empty()) {
        cell.failed = true;
        cell.error = out.error;
        break;
      }
      double sq = 0.0;
      for (std::size_t i = 0; i < folds[f].size(); ++i) {
        const auto row = folds[f][i];
        pooled[row] = out.predictions[i];
        const double e = out.predictions[i] - y[row];
        sq += e * e;
      }
      mse_sum += sq / static_cast<double>(folds[f].size());
    }
    if (cell.failed) continue;
    cell.mean_mse = mse_sum / static_cast<double>(k);
    try {
      cell.pooled = metrics(y, pooled, tolerance);
    } catch (const DataError& e) {
      cell.pooled.mse = cell.mean_mse;
    }
    if (!std::isfinite(cell.mean_mse)) {
      cell.failed = true;
      cell.error = "non-finite validation error";
      continue;
    }
    if (!any || cell.mean_mse < result.cells[result.best_index].mean_mse) {
      result.best_index = c;
      any = true;
    }
  }
  if (!any) {
    throw DataError("grid search: every cell failed (first error: " + result.cells.front().error +
                    ")");
  }
  result.best = result.cells[result.best_index].hyperparams;
  return result;
}

std::string_view phase_name(Phase phase) {
  return phase == Phase::Adding ? "adding" : "removing";
}

JackknifeReport jackknife(LearnerKind learner, const Hyperparams& hp, const FeatureMatrix& matrix,
                          const TrainTestSplit& split, double tolerance, unsigned threads) {
  const std::size_t n = matrix.rows();
  if (matrix.target.size() != n) throw DataError("jackknife: matrix has no targets");
  if (split.train.empty() || split.test.empty()) throw DataError("jackknife: degenerate split");
  for (const auto i : split.train) {
    if (i >= n) throw DataError("jackknife: split index out of range");
  }
  for (const auto i : split.test) {
    if (i >= n) throw DataError("jackknife: split index out of range");
  }
  for (const auto g : kFactorGroups) {
    if (matrix.group_columns(g).empty()) {
      throw DataError("jackknife: no columns for group " + std::string(group_name(g)));
    }
  }

  std::vector<std::vector<std::size_t>> column_sets;
  column_sets.push_back([&] {
    std::vector<std::size_t> all(matrix.features.cols());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }());
  JackknifeReport report;
  for (const auto g : kFactorGroups) {
    for (const auto phase : {Phase::Adding, Phase::Removing}) {
      auto cols = phase == Phase::Adding ? matrix.group_columns(g) : matrix.columns_except(g);
      JackknifeRow row{g, phase, {}, {}};
      for (const auto c : cols) row.columns.push_back(matrix.features.names()[c]);
      report.rows.push_back(std::move(row));
      column_sets.push_back(std::move(cols));
    }
  }

  const auto train_x = matrix.features.take_rows(split.train);
  const auto test_x = matrix.features.take_rows(split.test);
  const auto train_y = take(std::span<const double>(matrix.target),
                            std::span<const std::size_t>(split.train));
  const auto test_y = take(std::span<const double>(matrix.target),
                           std::span<const std::size_t>(split.test));
  std::vector<MetricsReport> results(column_sets.size());
  parallel_for(column_sets.size(), threads, [&](std::size_t i) {
    const auto model = fit(learner, train_x.take_columns(column_sets[i]), train_y, hp);
    results[i] = metrics(test_y, predict(model, test_x.take_columns(column_sets[i])), tolerance);
  });
  report.baseline = results[0];
  for (std::size_t i = 0; i < report.rows.size(); ++i) report.rows[i].metrics = results[i + 1];
  return report;
}

std::vector<CorrelationRow> correlation_table(const FeatureMatrix& matrix) {
  if (matrix.rows() < 2) throw DataError("correlation table needs at least 2 rows");
  if (matrix.target.size() != matrix.rows()) throw DataError("correlation table needs targets");
  std::vector<CorrelationRow> out;
  for (std::size_t c = 0; c < matrix.features.cols(); ++c) {
    const auto col = matrix.features.column(c);
    out.push_back({matrix.features.names()[c], matrix.groups[c],
                   pearson(col, std::span<const double>(matrix.target))});
  }
  return out;
}

std::string_view gini_metric_name(GiniMetric metric) {
  switch (metric) {
    case GiniMetric::Papers: return "papers";
    case GiniMetric::Citations: return "citations";
    case GiniMetric::HIndex: return "h_index";
  }
  return "unknown";
}

GiniReport gini_report(const CorpusSnapshot& snap) {
  const auto& corpus = snap.corpus();
  struct Entry {
    InstitutionIndex index;
    std::size_t authors;
    std::array<double, 3> gini;
  };
  std::vector<Entry> entries;
  std::vector<double> papers;
  std::vector<double> citations;
  std::vector<double> hs;
  std::vector<std::uint32_t> counts;
  for (const InstitutionIndex inst : snap.institutions()) {
    const auto members = snap.institution_authors(inst);
    if (members.empty()) continue;
    papers.clear();
    citations.clear();
    hs.clear();
    for (const AuthorIndex a : members) {
      counts.clear();
      double cits = 0;
      for (const PaperIndex p : snap.author_papers(a)) {
        counts.push_back(snap.citation_count(p));
        cits += counts.back();
      }
      papers.push_back(static_cast<double>(counts.size()));
      citations.push_back(cits);
      hs.push_back(static_cast<double>(h_index(counts)));
    }
    entries.push_back({inst, members.size(),
                       {gini_coefficient(papers), gini_coefficient(citations),
                        gini_coefficient(hs)}});
  }
  if (entries.empty()) throw DataError("gini report: no institution has authors");
  // Institution indices follow id order, so a stable sort breaks ties by id.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.authors > b.authors; });

  GiniReport report;
  for (const auto& e : entries) report.ranking.push_back(corpus.institution(e.index).id);
  const std::size_t total = entries.size();
  const auto cohort_size = [&](double share) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(
                                        std::floor(share * static_cast<double>(total) + 1e-9)));
  };
  const auto add = [&](std::string name, std::size_t begin, std::size_t end) {
    GiniCohort cohort;
    cohort.name = std::move(name);
    for (std::size_t i = begin; i < end; ++i) {
      cohort.institutions.push_back(report.ranking[i]);
      for (std::size_t m = 0; m < 3; ++m) cohort.mean_gini[m] += entries[i].gini[m];
    }
    for (auto& v : cohort.mean_gini) v /= static_cast<double>(end - begin);
    report.cohorts.push_back(std::move(cohort));
  };
  add("top5", 0, cohort_size(0.05));
  add("top10", 0, cohort_size(0.10));
  add("top20", 0, cohort_size(0.20));
  add("last10", total - cohort_size(0.10), total);
  return report;
}

}  // namespace scifactor
