#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "scifactor/error.hpp"
#include "scifactor/learners.hpp"
#include "scifactor/rng.hpp"

using namespace scifactor;

namespace {

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("f" + std::to_string(i));
  return out;
}

struct Fixture {
  DesignMatrix x;
  std::vector<double> y;
};

Fixture random_fixture(std::uint64_t seed, std::size_t rows, std::size_t cols, bool integer_x = false) {
  Rng rng(seed);
  std::vector<double> v(rows * cols);
  for (auto& e : v) e = integer_x ? static_cast<double>(rng.below(6)) : rng.normal();
  std::vector<double> y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = 2.0 * v[r * cols] - (cols > 1 ? v[r * cols + 1] * v[r * cols + 1] : 0.0) + 0.3 * rng.normal();
  }
  return {DesignMatrix(rows, names(cols), std::move(v)), std::move(y)};
}

double mse(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

struct Split {
  int feature = -1;
  double threshold = 0;
  double sse = std::numeric_limits<double>::infinity();
};

// Exhaustive root split: minimal total SSE, ties to the lowest feature then threshold.
Split oracle_root_split(const DesignMatrix& x, std::span<const double> y, std::size_t min_leaf) {
  Split best;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::set<double> values;
    for (std::size_t r = 0; r < x.rows(); ++r) values.insert(x(r, f));
    std::vector<double> sorted(values.begin(), values.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const double t = sorted[i] + (sorted[i + 1] - sorted[i]) / 2.0;
      double sl = 0, sr = 0;
      std::size_t nl = 0, nr = 0;
      for (std::size_t r = 0; r < x.rows(); ++r) {
        if (x(r, f) <= t) {
          sl += y[r];
          ++nl;
        } else {
          sr += y[r];
          ++nr;
        }
      }
      if (nl < min_leaf || nr < min_leaf) continue;
      const double ml = sl / static_cast<double>(nl), mr = sr / static_cast<double>(nr);
      double sse = 0;
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double m = x(r, f) <= t ? ml : mr;
        sse += (y[r] - m) * (y[r] - m);
      }
      if (best.feature < 0 || sse < best.sse - 1e-9 * std::max(1.0, best.sse)) best = {static_cast<int>(f), t, sse};
    }
  }
  return best;
}

double sum_abs_leaves(const TrainedModel& m) {
  double s = 0;
  for (const auto& tree : std::get<BoostedEnsemble>(m.payload()).trees) {
    for (const auto& n : tree.nodes()) {
      if (n.feature < 0) s += std::abs(n.value);
    }
  }
  return s;
}

}  // namespace

TEST_CASE("hyperparameter validation and setters") {
  Hyperparams hp;
  hp.validate();
  hp.set("lambda", 3);
  CHECK(hp.l2_reg == 3);
  hp.set("gamma", 0.5);
  CHECK(hp.leaf_penalty == 0.5);
  hp.set("max_depth", 4);
  CHECK(hp.max_depth == 4);
  CHECK_THROWS_AS(hp.set("max_depth", 2.5), ConfigError);
  CHECK_THROWS_AS(hp.set("nonsense", 1), ConfigError);
  for (auto bad : {std::pair<const char*, double>{"learning_rate", 0}, {"subsample", 0},
                   {"subsample", 1.5}, {"colsample", -1}, {"l2_reg", -1}, {"leaf_penalty", -0.1},
                   {"max_depth", 0}, {"min_samples_leaf", 0}}) {
    Hyperparams h;
    h.set(bad.first, bad.second);
    CHECK_THROWS_AS(h.validate(), ConfigError);
  }
  const auto back = Hyperparams::from_json(hp.to_json());
  CHECK(back.to_json() == hp.to_json());
  CHECK(parse_learner("xgb") == LearnerKind::Xgb);
  CHECK(parse_learner("linear") == LearnerKind::Linear);
  CHECK_FALSE(parse_learner("svm").has_value());
}

TEST_CASE("linear regression examples") {
  DesignMatrix x(5, {"x"}, {0, 1, 2, 3, 4});
  const std::vector<double> y{0, 2, 4, 6, 8};
  Hyperparams hp;
  hp.l2_reg = 0;
  const auto m = fit_linear(x, y, hp);
  const auto& lin = std::get<LinearModel>(m.payload());
  CHECK(std::abs(lin.weights[0] - 2.0) < 1e-4);
  CHECK(std::abs(lin.bias) < 1e-4);

  const std::vector<double> flat{3, 3, 3, 3, 3};
  const auto c = fit_linear(x, flat, hp);
  CHECK(std::get<LinearModel>(c.payload()).bias == doctest::Approx(3.0));
  CHECK(std::abs(std::get<LinearModel>(c.payload()).weights[0]) < 1e-12);

  hp.l2_reg = 1e12;
  const auto ridge = fit_linear(x, y, hp);
  CHECK(std::abs(std::get<LinearModel>(ridge.payload()).weights[0]) < 1e-6);
  for (const double p : predict(ridge, x)) CHECK(p == doctest::Approx(4.0).epsilon(1e-6));

  DesignMatrix with_const(5, {"x", "k"}, {0, 7, 1, 7, 2, 7, 3, 7, 4, 7});
  hp.l2_reg = 0;
  const auto wc = fit_linear(with_const, y, hp);
  CHECK(std::get<LinearModel>(wc.payload()).weights[1] == 0.0);

  const TrainedModel hand(LearnerKind::Linear, {"x"}, Hyperparams{}, LinearModel{{2.0}, 1.0, {2.0}});
  CHECK(hand.predict_row(std::vector<double>{3.0}) == 7.0);
  DesignMatrix one(1, {"x"}, {1});
  CHECK_THROWS_AS(fit_linear(one, std::vector<double>{1}, hp), DataError);
}

TEST_CASE("cart examples") {
  DesignMatrix x(2, {"x"}, {0, 1});
  const std::vector<double> y{0, 10};
  Hyperparams hp;
  hp.max_depth = 1;
  const auto m = fit_cart(x, y, hp);
  const auto p = predict(m, x);
  CHECK(p == std::vector<double>{0, 10});
  CHECK(mse(p, y) == 0.0);
  CHECK(std::get<RegressionTree>(m.payload()).nodes()[0].threshold == 0.5);
  CHECK(m.predict_row(std::vector<double>{0.0}) == 0.0);

  const auto flat = fit_cart(x, std::vector<double>{4, 4}, hp);
  CHECK(std::get<RegressionTree>(flat.payload()).nodes().size() == 1);
  CHECK(flat.predict_row(std::vector<double>{9.0}) == 4.0);

  hp.min_samples_leaf = 2;
  CHECK_THROWS_AS(fit_cart(x, y, hp), DataError);
}

TEST_CASE("cart root split matches exhaustive oracle") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto cols = 1 + seed % 4;
    const auto min_leaf = 1 + seed % 3;
    auto f = random_fixture(seed, 30, cols, seed % 2 == 0);
    Hyperparams hp;
    hp.max_depth = 3;
    hp.min_samples_leaf = static_cast<int>(min_leaf);
    const auto m = fit_cart(f.x, f.y, hp);
    const auto& tree = std::get<RegressionTree>(m.payload());
    const auto want = oracle_root_split(f.x, f.y, min_leaf);
    REQUIRE(want.feature >= 0);
    CHECK(tree.nodes()[0].feature == want.feature);
    CHECK(tree.nodes()[0].threshold == want.threshold);
    CHECK(tree.depth() <= hp.max_depth);

    // Every node's training rows obey the leaf-size floor.
    std::vector<std::size_t> reach(tree.nodes().size(), 0);
    for (std::size_t r = 0; r < f.x.rows(); ++r) {
      int n = 0;
      while (true) {
        ++reach[static_cast<std::size_t>(n)];
        const auto& node = tree.nodes()[static_cast<std::size_t>(n)];
        if (node.feature < 0) break;
        n = f.x(r, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
      }
    }
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
      if (tree.nodes()[i].feature >= 0) CHECK(reach[i] >= 2 * min_leaf);
      else CHECK(reach[i] >= min_leaf);
    }
  }
}

TEST_CASE("cart tie-break prefers the lowest feature") {
  DesignMatrix x(4, {"a", "b"}, {0, 0, 0, 0, 1, 1, 1, 1});
  const auto m = fit_cart(x, std::vector<double>{0, 0, 5, 5}, Hyperparams{});
  CHECK(std::get<RegressionTree>(m.payload()).nodes()[0].feature == 0);
}

TEST_CASE("gbdt fits training data and respects n_trees 0") {
  auto f = random_fixture(5, 100, 3);
  Hyperparams hp;
  hp.learning_rate = 1.0;
  hp.max_depth = 64;
  hp.n_trees = 100;
  const auto m = fit_gbdt(f.x, f.y, hp);
  CHECK(mse(predict(m, f.x), f.y) < 1e-6);

  hp.n_trees = 0;
  const auto zero = fit_gbdt(f.x, f.y, hp);
  double mean = 0;
  for (double v : f.y) mean += v;
  mean /= static_cast<double>(f.y.size());
  for (double p : predict(zero, f.x)) CHECK(p == doctest::Approx(mean));
}

TEST_CASE("boosting training error is non-increasing in rounds") {
  auto f = random_fixture(8, 60, 3);
  for (const auto kind : {LearnerKind::Gbdt, LearnerKind::Xgb}) {
    Hyperparams hp;
    hp.n_trees = 30;
    hp.max_depth = 3;
    const auto m = fit(kind, f.x, f.y, hp);
    const auto& e = std::get<BoostedEnsemble>(m.payload());
    std::vector<double> staged(f.y.size(), e.base_score);
    double prev = mse(staged, f.y);
    for (std::size_t t = 0; t < e.trees.size(); ++t) {
      for (std::size_t r = 0; r < f.x.rows(); ++r) staged[r] += e.learning_rates[t] * e.trees[t].predict(f.x.row(r));
      const double now = mse(staged, f.y);
      CHECK(now <= prev + 1e-12);
      prev = now;
    }
  }
}

TEST_CASE("xgb with zero regularization matches gbdt") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto f = random_fixture(100 + seed, 80, 4);
    Hyperparams hp;
    hp.l2_reg = 0;
    hp.leaf_penalty = 0;
    hp.n_trees = 20;
    hp.max_depth = 4;
    hp.subsample = 0.8;
    hp.colsample = 0.75;
    hp.seed = seed;
    const auto a = predict(fit_gbdt(f.x, f.y, hp), f.x);
    const auto b = predict(fit_xgb(f.x, f.y, hp), f.x);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9);
  }
}

TEST_CASE("xgb regularization effects") {
  auto f = random_fixture(13, 50, 3);
  Hyperparams hp;
  hp.n_trees = 10;
  hp.max_depth = 3;
  hp.leaf_penalty = 1e9;
  const auto stump = fit_xgb(f.x, f.y, hp);
  const auto& e = std::get<BoostedEnsemble>(stump.payload());
  for (const auto& t : e.trees) CHECK(t.nodes().size() == 1);
  for (double p : predict(stump, f.x)) CHECK(p == doctest::Approx(e.base_score));

  hp.leaf_penalty = 0;
  hp.n_trees = 1;
  double prev = std::numeric_limits<double>::infinity();
  for (const double lambda : {0.0, 1.0, 10.0}) {
    hp.l2_reg = lambda;
    const double s = sum_abs_leaves(fit_xgb(f.x, f.y, hp));
    CHECK(s <= prev + 1e-12);
    prev = s;
  }

  // lambda 0: each leaf holds its rows' mean residual.
  hp.l2_reg = 0;
  hp.max_depth = 2;
  const auto m = fit_xgb(f.x, f.y, hp);
  const auto& tree = std::get<BoostedEnsemble>(m.payload()).trees[0];
  const double base = std::get<BoostedEnsemble>(m.payload()).base_score;
  std::map<const TreeNode*, std::pair<double, int>> leaves;
  for (std::size_t r = 0; r < f.x.rows(); ++r) {
    int n = 0;
    while (tree.nodes()[static_cast<std::size_t>(n)].feature >= 0) {
      const auto& node = tree.nodes()[static_cast<std::size_t>(n)];
      n = f.x(r, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
    }
    auto& acc = leaves[&tree.nodes()[static_cast<std::size_t>(n)]];
    acc.first += f.y[r] - base;
    acc.second += 1;
  }
  for (const auto& [leaf, acc] : leaves) CHECK(leaf->value == doctest::Approx(acc.first / acc.second));
}

TEST_CASE("determinism and serialization round trip for all learners") {
  auto f = random_fixture(21, 70, 4);
  Hyperparams hp;
  hp.n_trees = 15;
  hp.subsample = 0.7;
  hp.colsample = 0.5;
  hp.seed = 99;
  for (const auto kind : {LearnerKind::Linear, LearnerKind::Cart, LearnerKind::Gbdt, LearnerKind::Xgb}) {
    const auto a = fit(kind, f.x, f.y, hp);
    const auto b = fit(kind, f.x, f.y, hp);
    CHECK(a.serialize() == b.serialize());
    const auto back = TrainedModel::deserialize(a.serialize());
    CHECK(back.serialize() == a.serialize());
    CHECK(back.kind() == kind);
    const auto pa = predict(a, f.x), pb = predict(back, f.x);
    CHECK(pa == pb);
    for (double p : pa) CHECK(std::isfinite(p));
    DesignMatrix narrow(1, {"f0"}, {1.0});
    CHECK_THROWS_AS(predict(a, narrow), DataError);
  }
  hp.seed = 100;
  CHECK(fit_xgb(f.x, f.y, hp).serialize() != fit_xgb(f.x, f.y, [&] {
          auto h = hp;
          h.seed = 99;
          return h;
        }()).serialize());
  CHECK_THROWS_AS(TrainedModel::deserialize("{\"format_version\":1}"), DataError);
  CHECK_THROWS_AS(TrainedModel::deserialize("not json"), DataError);
}

TEST_CASE("non-finite inputs are rejected") {
  DesignMatrix x(2, {"x"}, {0, std::numeric_limits<double>::infinity()});
  for (const auto kind : {LearnerKind::Linear, LearnerKind::Cart, LearnerKind::Gbdt, LearnerKind::Xgb}) {
    CHECK_THROWS_AS(fit(kind, x, std::vector<double>{1, 2}, Hyperparams{}), DataError);
    DesignMatrix ok(2, {"x"}, {0, 1});
    CHECK_THROWS_AS(fit(kind, ok, std::vector<double>{1, std::nan("")}, Hyperparams{}), DataError);
    CHECK_THROWS_AS(fit(kind, ok, std::vector<double>{1}, Hyperparams{}), DataError);
  }
}

TEST_CASE("importance counts splits and group shares") {
  DesignMatrix x(2, {"Cits", "h_a"}, {0, 5, 1, 5});
  Hyperparams hp;
  hp.max_depth = 1;
  const auto one = importance(fit_cart(x, std::vector<double>{0, 10}, hp));
  CHECK(one.measure == ImportanceMeasure::SplitCount);
  REQUIRE(one.per_feature.size() == 1);
  CHECK(one.per_feature[0] == std::pair<std::string, double>{"Cits", 1.0});
  REQUIRE(one.group_shares.size() == 1);
  CHECK(one.group_shares[0].first == FactorGroup::Article);
  CHECK(one.group_shares[0].second == doctest::Approx(100.0));

  const auto none = importance(fit_cart(x, std::vector<double>{3, 3}, hp));
  CHECK(none.per_feature.empty());
  CHECK(none.group_shares.empty());

  auto f = random_fixture(2, 60, 3);
  DesignMatrix named(60, {"Cits", "h_a", "GDP"}, std::vector<double>(f.x.values().begin(), f.x.values().end()));
  Hyperparams deep;
  deep.n_trees = 10;
  const auto imp = importance(fit_xgb(named, f.y, deep));
  double total = 0;
  for (const auto& [g, share] : imp.group_shares) total += share;
  CHECK(total == doctest::Approx(100.0));

  const auto lin = importance(fit_linear(named, f.y, Hyperparams{}));
  CHECK(lin.measure == ImportanceMeasure::AbsStandardizedWeight);
  for (const auto& [n, v] : lin.per_feature) CHECK(v > 0);
}
