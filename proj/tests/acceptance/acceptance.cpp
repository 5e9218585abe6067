// One line per acceptance criterion; exits 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "scifactor/eval.hpp"
#include "scifactor/graphs.hpp"
#include "scifactor/learners.hpp"
#include "scifactor/pipeline.hpp"
#include "scifactor/rng.hpp"
#include "scifactor/scimetrics.hpp"

using namespace scifactor;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Reporting

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

int failures = 0;

void run(const char* id, const char* title, const std::function<Check()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  try {
    c = body();
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%s] %s %s (%.1fs)%s%s\n", c.ok ? "PASS" : "FAIL", id, title, secs,
              c.detail.empty() ? "" : ": ", c.detail.c_str());
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

double elapsed_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Oracles

std::uint32_t oracle_h(std::vector<std::uint32_t> c) {
  std::sort(c.rbegin(), c.rend());
  std::uint32_t h = 0;
  while (h < c.size() && c[h] >= h + 1) ++h;
  return h;
}

double oracle_entropy(const std::vector<double>& c) {
  const double total = std::accumulate(c.begin(), c.end(), 0.0);
  double h = 0;
  for (double v : c) {
    if (v > 0) h -= (v / total) * std::log2(v / total);
  }
  return h;
}

double oracle_gini(const std::vector<double>& v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (total == 0) return 0;
  double diff = 0;
  for (double a : v) {
    for (double b : v) diff += std::abs(a - b);
  }
  return diff / (2.0 * static_cast<double>(v.size()) * total);
}

double oracle_cosine(const std::vector<TermId>& a, const std::vector<TermId>& b) {
  std::map<TermId, double> ma, mb;
  for (auto t : a) ma[t] += 1;
  for (auto t : b) mb[t] += 1;
  if (ma.empty() || mb.empty()) return 0;
  double dot = 0, na = 0, nb = 0;
  for (auto& [k, v] : ma) {
    na += v * v;
    if (mb.count(k)) dot += v * mb[k];
  }
  for (auto& [k, v] : mb) nb += v * v;
  return dot / std::sqrt(na * nb);
}

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

using EdgeList = std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>;

// Stationary vector of the dense Google matrix via Gaussian elimination.
std::vector<double> oracle_pagerank(std::size_t n, const EdgeList& edges, double d) {
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (const auto& [s, t, x] : edges) w[s][t] += x;
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t from = 0; from < n; ++from) {
    const double out = std::accumulate(w[from].begin(), w[from].end(), 0.0);
    for (std::size_t to = 0; to < n; ++to) {
      const double p = out > 0 ? w[from][to] / out : 1.0 / static_cast<double>(n);
      a[to][from] = d * p + (1.0 - d) / static_cast<double>(n);
    }
  }
  for (std::size_t i = 0; i < n; ++i) a[i][i] -= 1.0;
  for (std::size_t c = 0; c <= n; ++c) a[n - 1][c] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = a[i][n] / a[i][i];
  return x;
}

struct OracleSplit {
  int feature = -1;
  double threshold = 0;
  double sse = 0;
};

OracleSplit oracle_root_split(const DesignMatrix& x, std::span<const double> y) {
  OracleSplit best;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::set<double> distinct;
    for (std::size_t r = 0; r < x.rows(); ++r) distinct.insert(x(r, f));
    const std::vector<double> v(distinct.begin(), distinct.end());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double t = v[i] + (v[i + 1] - v[i]) / 2.0;
      double sl = 0, sr = 0, nl = 0, nr = 0;
      for (std::size_t r = 0; r < x.rows(); ++r) {
        (x(r, f) <= t ? sl : sr) += y[r];
        (x(r, f) <= t ? nl : nr) += 1;
      }
      double sse = 0;
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double m = x(r, f) <= t ? sl / nl : sr / nr;
        sse += (y[r] - m) * (y[r] - m);
      }
      if (best.feature < 0 || sse < best.sse - 1e-9 * std::max(1.0, best.sse)) {
        best = {static_cast<int>(f), t, sse};
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Fixtures

PaperRecord make_paper(std::string id, int year, const std::string& author,
                       const std::string& institution, std::vector<std::string> refs = {}) {
  PaperRecord p;
  p.id = std::move(id);
  p.year = year;
  p.venue = "V";
  p.references = std::move(refs);
  Authorship a;
  a.author_id = author;
  a.author_name = author;
  a.institution_id = institution;
  p.authorships.push_back(a);
  return p;
}

DesignMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, bool discrete) {
  std::vector<double> v(rows * cols);
  for (auto& e : v) e = discrete ? static_cast<double>(rng.below(5)) : rng.normal();
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("x" + std::to_string(c));
  return DesignMatrix(rows, names, v);
}

std::vector<double> random_target(Rng& rng, const DesignMatrix& x) {
  std::vector<double> y(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    y[r] = 1.5 * x(r, 0) + (x.cols() > 1 ? std::sin(x(r, 1)) : 0.0) + 0.2 * rng.normal();
  }
  return y;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig desk_config() {
  std::istringstream in(R"(
seed = 42
cutoff_year = 2012
target_year = 2015
delta_t = 7
learner = "xgb"
folds = 5
[hyperparams]
n_trees = 100
subsample = 0.8
colsample = 0.8
[grid]
max_depth = [4, 6]
learning_rate = [0.05, 0.1]
[synth]
seed = 42
n_authors = 5000
)");
  return apply_config(ConfigFile::parse(in, "acceptance"));
}

struct DeskRun {
  PipelineResult result;
  fs::path dir;
  double seconds = 0;
};

DeskRun run_desk(const fs::path& dir, unsigned threads) {
  fs::remove_all(dir);
  PipelineOptions o;
  o.config = desk_config();
  o.out_dir = dir;
  o.threads = threads;
  const auto start = std::chrono::steady_clock::now();
  DeskRun r{run_pipeline(o), dir, 0};
  r.seconds = elapsed_since(start);
  return r;
}

const fs::path kRoot = fs::temp_directory_path() / "scifactor_acceptance";

}  // namespace

int main() {
  fs::remove_all(kRoot);

  run("AC1", "primitive oracles", [] {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    Rng rng(20240601);
    for (int t = 0; t < 1000; ++t) {
      std::vector<std::uint32_t> cites(rng.below(60));
      for (auto& v : cites) v = static_cast<std::uint32_t>(rng.geometric(6.0) - 1);
      c.require(h_index(cites) == oracle_h(cites), "h_index mismatch");

      std::vector<double> counts(1 + rng.below(25));
      for (auto& v : counts) v = static_cast<double>(rng.below(12));
      counts[0] += 1;
      c.require(std::abs(shannon_entropy(counts) - oracle_entropy(counts)) <= 1e-9, "entropy mismatch");

      std::vector<double> g(1 + rng.below(40));
      for (auto& v : g) v = rng.lognormal(0.0, 1.0) * (rng.uniform() < 0.2 ? 0.0 : 1.0);
      c.require(std::abs(gini_coefficient(g) - oracle_gini(g)) <= 1e-9, "gini mismatch");

      std::vector<TermId> ta(rng.below(15)), tb(rng.below(15));
      for (auto& v : ta) v = static_cast<TermId>(rng.below(10));
      for (auto& v : tb) v = static_cast<TermId>(rng.below(10));
      const double cs = cosine_similarity(TermVector::from_terms(ta), TermVector::from_terms(tb));
      c.require(std::abs(cs - oracle_cosine(ta, tb)) <= 1e-9, "cosine mismatch");

      const std::size_t n = 2 + rng.below(50);
      std::vector<double> x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal() + 0.7 * x[i];
      }
      const auto r = pearson(x, y);
      c.require(r.has_value() && std::abs(*r - oracle_pearson(x, y)) <= 1e-9, "pearson mismatch");
    }
    c.require(std::abs(gini_coefficient(std::vector<double>{1, 1, 1, 1}) - 0.0) <= 1e-12, "gini [1,1,1,1]");
    c.require(std::abs(gini_coefficient(std::vector<double>{0, 10}) - 0.5) <= 1e-12, "gini [0,10]");
    c.require(std::abs(gini_coefficient(std::vector<double>{1, 2, 3, 4}) - 0.25) <= 1e-12, "gini [1,2,3,4]");
    c.require(elapsed_since(start) < 5.0, "runtime over 5 s");
    return c;
  });

  run("AC2", "pagerank vs dense oracle", [] {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    Rng rng(77);
    double worst = 0, worst_sum = 0;
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = 1 + rng.below(50);
      EdgeList edges;
      const auto m = rng.below(5 * n + 1);
      for (std::uint64_t e = 0; e < m; ++e) {
        edges.emplace_back(static_cast<std::uint32_t>(rng.below(n)), static_cast<std::uint32_t>(rng.below(n)),
                           rng.uniform() < 0.5 ? 1.0 : 0.1 + 3.0 * rng.uniform());
      }
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < n; ++i) ids.push_back("n" + std::to_string(1000 + i));
      const auto g = DirectedGraph::from_edges(ids, edges);
      const auto r = pagerank(g);
      const auto want = oracle_pagerank(n, edges, 0.85);
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(r.scores[i] - want[i]));
        sum += r.scores[i];
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
    c.require(worst <= 1e-8, "max node error " + fmt(worst));
    c.require(worst_sum <= 1e-9, "sum error " + fmt(worst_sum));
    c.require(elapsed_since(start) < 10.0, "runtime over 10 s");
    if (c.ok) c.detail = "max node error " + fmt(worst);
    return c;
  });

  run("AC3", "learner sanity", [] {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
      const auto x = random_matrix(rng, 5 + rng.below(26), 1 + rng.below(4), t % 2 == 0);
      const auto y = random_target(rng, x);
      Hyperparams hp;
      hp.max_depth = 2;
      const auto m = fit_cart(x, y, hp);
      const auto& root = std::get<RegressionTree>(m.payload()).nodes()[0];
      const auto want = oracle_root_split(x, y);
      c.require(root.feature == want.feature && root.threshold == want.threshold,
                "CART root split differs on fixture " + std::to_string(t));
    }
    double worst_mse = 0;
    for (int t = 0; t < 5; ++t) {
      const auto x = random_matrix(rng, 100, 3, false);
      const auto y = random_target(rng, x);
      Hyperparams hp;
      hp.learning_rate = 1.0;
      hp.max_depth = 100;
      hp.n_trees = 100;
      const auto p = predict(fit_gbdt(x, y, hp), x);
      double mse = 0;
      for (std::size_t i = 0; i < y.size(); ++i) mse += (p[i] - y[i]) * (p[i] - y[i]);
      worst_mse = std::max(worst_mse, mse / static_cast<double>(y.size()));
    }
    c.require(worst_mse < 1e-6, "GBDT training MSE " + fmt(worst_mse));
    double worst_gap = 0;
    for (int t = 0; t < 10; ++t) {
      const auto x = random_matrix(rng, 120, 4, t % 2 == 1);
      const auto y = random_target(rng, x);
      Hyperparams hp;
      hp.l2_reg = 0;
      hp.leaf_penalty = 0;
      hp.n_trees = 30;
      hp.max_depth = 4;
      hp.subsample = 0.7;
      hp.colsample = 0.75;
      hp.seed = static_cast<std::uint64_t>(t);
      const auto a = predict(fit_gbdt(x, y, hp), x);
      const auto b = predict(fit_xgb(x, y, hp), x);
      for (std::size_t i = 0; i < a.size(); ++i) worst_gap = std::max(worst_gap, std::abs(a[i] - b[i]));
    }
    c.require(worst_gap <= 1e-9, "XGB vs GBDT gap " + fmt(worst_gap));
    c.require(elapsed_since(start) < 30.0, "runtime over 30 s");
    return c;
  });

  run("AC4", "metric equations", [] {
    Check c;
    const auto m = metrics(std::vector<double>{2, 4}, std::vector<double>{3, 3}, 1.0);
    c.require(m.mae == 1.0, "MAE " + fmt(m.mae));
    c.require(m.mse == 1.0, "MSE " + fmt(m.mse));
    c.require(m.mape == 37.5, "MAPE " + fmt(m.mape));
    c.require(m.acc == 1.0, "ACC " + fmt(m.acc));
    c.require(m.r2 == 0.0, "R2 " + fmt(m.r2));
    return c;
  });

  DeskRun desk;
  run("AC5", "end-to-end held-out accuracy", [&] {
    Check c;
    desk = run_desk(kRoot / "run1", 1);
    const auto& primary = desk.result.runs[desk.result.primary_run];
    c.require(primary.learner == LearnerKind::Xgb && primary.delta_t == 7, "primary run is not xgb/7");
    c.require(primary.grid.has_value() && primary.grid->cells.size() == 4, "grid search missing");
    c.require(primary.test_metrics.r2 >= 0.8, "R2 " + fmt(primary.test_metrics.r2));
    c.require(primary.test_metrics.acc >= 0.7, "ACC " + fmt(primary.test_metrics.acc));
    c.require(desk.seconds < 300.0, "runtime over 5 min");
    if (c.ok) {
      c.detail = "R2 " + fmt(primary.test_metrics.r2) + ", ACC " + fmt(primary.test_metrics.acc) +
                 ", " + std::to_string(desk.result.feature_rows) + " authors";
    }
    return c;
  });

  run("AC6", "jackknife and importance", [&] {
    Check c;
    c.require(!desk.result.runs.empty(), "no pipeline result");
    if (!c.ok) return c;
    const auto& jk = desk.result.jackknife;
    c.require(jk.rows.size() == 10, "expected 10 ablation rows plus baseline");
    double rm_author = -1, rm_venue = -1;
    for (const auto& row : jk.rows) {
      if (row.phase != Phase::Removing) continue;
      if (row.group == FactorGroup::Author) rm_author = row.metrics.acc;
      if (row.group == FactorGroup::Venue) rm_venue = row.metrics.acc;
    }
    c.require(rm_author >= 0 && rm_author <= rm_venue,
              "removing Author ACC " + fmt(rm_author) + " vs Venue " + fmt(rm_venue));
    double share = 0;
    for (const auto& [g, s] : desk.result.importance.group_shares) {
      if (g == FactorGroup::Author || g == FactorGroup::Article) share += s;
    }
    c.require(share > 50.0, "Author+Article share " + fmt(share));
    const auto csv = slurp(desk.dir / "jackknife.csv");
    c.require(std::count(csv.begin(), csv.end(), '\n') == 12, "jackknife.csv must have header + 11 rows");
    if (c.ok) {
      c.detail = "Author+Article " + fmt(share) + "%, removing Author ACC " + fmt(rm_author) +
                 " <= Venue " + fmt(rm_venue);
    }
    return c;
  });

  run("AC7", "institution gini report", [] {
    Check c;
    // Identical authors.
    std::vector<PaperRecord> same;
    std::vector<InstitutionRecord> one{{"I", "inst", "C", false}};
    for (int i = 0; i < 5; ++i) same.push_back(make_paper("p" + std::to_string(i), 2000, "a" + std::to_string(i), "I"));
    const auto flat = gini_report(snapshot(Corpus::from_records(same, one, {}), 2000));
    for (const auto& cohort : flat.cohorts) {
      for (const double g : cohort.mean_gini) c.require(g == 0.0, "identical authors give nonzero Gini");
    }

    // 20 institutions. I01 has 21 authors, one of them cited 10 times; the
    // rest have one uncited paper each, so only I01 has nonzero Ginis
    // (20/21 for citations and h-index). I03, I04, I05 tie at 18 authors.
    const std::vector<int> sizes{21, 19, 18, 18, 18, 15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
    std::vector<PaperRecord> papers;
    std::vector<InstitutionRecord> insts;
    for (std::size_t i = sizes.size(); i-- > 0;) {  // reverse input order
      char id[8];
      std::snprintf(id, sizeof id, "I%02zu", i + 1);
      insts.push_back({id, id, "C", false});
      for (int a = 0; a < sizes[i]; ++a) {
        const std::string author = std::string(id) + "_a" + std::to_string(a);
        papers.push_back(make_paper("P" + author, 2000, author, id));
      }
    }
    for (int k = 0; k < 10; ++k) {
      papers.push_back(make_paper("cite" + std::to_string(k), 2001, "outsider", "", {"PI01_a0"}));
    }
    const auto report = gini_report(snapshot(Corpus::from_records(papers, insts, {}), 2001));
    const std::vector<std::string> expected_rank{"I01", "I02", "I03", "I04", "I05", "I06", "I07",
                                                 "I08", "I09", "I10", "I11", "I12", "I13", "I14",
                                                 "I15", "I16", "I17", "I18", "I19", "I20"};
    c.require(report.ranking == expected_rank, "ranking differs from hand order");
    const double g1 = 20.0 / 21.0;
    struct Expect {
      std::string name;
      std::vector<std::string> members;
      double mean;
    };
    const std::vector<Expect> expected{{"top5", {"I01"}, g1},
                                       {"top10", {"I01", "I02"}, g1 / 2},
                                       {"top20", {"I01", "I02", "I03", "I04"}, g1 / 4},
                                       {"last10", {"I19", "I20"}, 0.0}};
    c.require(report.cohorts.size() == 4, "expected 4 cohorts");
    for (std::size_t k = 0; k < expected.size() && k < report.cohorts.size(); ++k) {
      const auto& got = report.cohorts[k];
      c.require(got.name == expected[k].name, "cohort order");
      c.require(got.institutions == expected[k].members, "cohort " + got.name + " membership");
      c.require(got.mean_gini[0] == 0.0, "cohort " + got.name + " paper Gini");
      c.require(std::abs(got.mean_gini[1] - expected[k].mean) <= 1e-12, "cohort " + got.name + " citation Gini");
      c.require(std::abs(got.mean_gini[2] - expected[k].mean) <= 1e-12, "cohort " + got.name + " h-index Gini");
    }
    return c;
  });

  run("AC8", "pipeline determinism", [&] {
    Check c;
    c.require(!desk.result.files.empty(), "no first pipeline run");
    if (!c.ok) return c;
    const auto again = run_desk(kRoot / "run2", 1);
    const auto threaded = run_desk(kRoot / "run3", 8);
    c.require(again.result.files == desk.result.files && threaded.result.files == desk.result.files,
              "file lists differ");
    for (const auto& f : desk.result.files) {
      const auto base = slurp(desk.dir / f);
      c.require(!base.empty(), f + " is empty");
      c.require(slurp(again.dir / f) == base, f + " differs between runs");
      c.require(slurp(threaded.dir / f) == base, f + " differs between 1 and 8 threads");
    }
    if (c.ok) c.detail = std::to_string(desk.result.files.size()) + " files byte-identical";
    return c;
  });

  fs::remove_all(kRoot);
  return failures == 0 ? 0 : 1;
}
