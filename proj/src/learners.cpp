#include "scifactor/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scifactor/error.hpp"
#include "scifactor/rng.hpp"

namespace scifactor {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view learner_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Linear: return "lr";
    case LearnerKind::Cart: return "cart";
    case LearnerKind::Gbdt: return "gbdt";
    case LearnerKind::Xgb: return "xgb";
  }
  return "unknown";
}

std::optional<LearnerKind> parse_learner(std::string_view name) {
  if (name == "lr" || name == "linear") return LearnerKind::Linear;
  if (name == "cart") return LearnerKind::Cart;
  if (name == "gbdt") return LearnerKind::Gbdt;
  if (name == "xgb") return LearnerKind::Xgb;
  return std::nullopt;
}

// --- hyperparameters --------------------------------------------------------

void Hyperparams::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("hyperparameter " + what); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (max_depth < 1) fail("max_depth must be >= 1");
  if (n_trees < 0) fail("n_trees must be >= 0");
  if (!(subsample > 0.0 && subsample <= 1.0)) fail("subsample must be in (0, 1]");
  if (!(colsample > 0.0 && colsample <= 1.0)) fail("colsample must be in (0, 1]");
  if (!(l2_reg >= 0.0) || !std::isfinite(l2_reg)) fail("l2_reg must be >= 0");
  if (!(leaf_penalty >= 0.0) || !std::isfinite(leaf_penalty)) fail("leaf_penalty must be >= 0");
  if (min_samples_leaf < 1) fail("min_samples_leaf must be >= 1");
}

namespace {

int as_int(std::string_view name, double value) {
  if (!std::isfinite(value) || value != std::floor(value) || std::abs(value) > 2e9) {
    throw ConfigError("hyperparameter " + std::string(name) + " must be an integer");
  }
  return static_cast<int>(value);
}

}  // namespace

void Hyperparams::set(std::string_view name, double value) {
  if (name == "learning_rate") {
    learning_rate = value;
  } else if (name == "max_depth") {
    max_depth = as_int(name, value);
  } else if (name == "n_trees") {
    n_trees = as_int(name, value);
  } else if (name == "subsample") {
    subsample = value;
  } else if (name == "colsample") {
    colsample = value;
  } else if (name == "l2_reg" || name == "lambda") {
    l2_reg = value;
  } else if (name == "leaf_penalty" || name == "gamma") {
    leaf_penalty = value;
  } else if (name == "min_samples_leaf") {
    min_samples_leaf = as_int(name, value);
  } else if (name == "seed") {
    if (!(value >= 0.0) || value != std::floor(value) || value > 9.007199254740992e15) {
      throw ConfigError("hyperparameter seed must be a non-negative integer");
    }
    seed = static_cast<std::uint64_t>(value);
  } else {
    throw ConfigError("unknown hyperparameter '" + std::string(name) + "'");
  }
}

const std::vector<std::string>& Hyperparams::field_names() {
  static const std::vector<std::string> names = {
      "learning_rate", "max_depth",    "n_trees",          "subsample", "colsample",
      "l2_reg",        "leaf_penalty", "min_samples_leaf", "seed"};
  return names;
}

ordered_json Hyperparams::to_json() const {
  ordered_json j;
  j["learning_rate"] = learning_rate;
  j["max_depth"] = max_depth;
  j["n_trees"] = n_trees;
  j["subsample"] = subsample;
  j["colsample"] = colsample;
  j["l2_reg"] = l2_reg;
  j["leaf_penalty"] = leaf_penalty;
  j["min_samples_leaf"] = min_samples_leaf;
  j["seed"] = seed;
  return j;
}

Hyperparams Hyperparams::from_json(const json& j) {
  Hyperparams hp;
  hp.learning_rate = j.at("learning_rate").get<double>();
  hp.max_depth = j.at("max_depth").get<int>();
  hp.n_trees = j.at("n_trees").get<int>();
  hp.subsample = j.at("subsample").get<double>();
  hp.colsample = j.at("colsample").get<double>();
  hp.l2_reg = j.at("l2_reg").get<double>();
  hp.leaf_penalty = j.at("leaf_penalty").get<double>();
  hp.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  hp.seed = j.at("seed").get<std::uint64_t>();
  return hp;
}

// --- models -----------------------------------------------------------------

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("tree has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.feature < 0) continue;
    const auto ok = [&](int child) {
      return child > static_cast<int>(i) && child < static_cast<int>(nodes_.size());
    };
    if (!ok(n.left) || !ok(n.right)) throw DataError("tree node has invalid children");
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                        : n.right);
  }
  return nodes_[i].value;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(),
                                                [](const TreeNode& n) { return n.feature < 0; }));
}

double BoostedEnsemble::predict(std::span<const double> x) const {
  double out = base_score;
  for (std::size_t t = 0; t < trees.size(); ++t) out += learning_rates[t] * trees[t].predict(x);
  return out;
}

TrainedModel::TrainedModel(LearnerKind kind, std::vector<std::string> feature_names,
                           Hyperparams hyperparams, Payload payload)
    : kind_(kind),
      feature_names_(std::move(feature_names)),
      hyperparams_(hyperparams),
      payload_(std::move(payload)) {
  const auto d = feature_names_.size();
  const auto check_tree = [&](const RegressionTree& tree) {
    for (const auto& n : tree.nodes()) {
      if (n.feature >= static_cast<int>(d)) throw DataError("tree splits on unknown feature");
    }
  };
  if (const auto* lin = std::get_if<LinearModel>(&payload_)) {
    if (lin->weights.size() != d) throw DataError("linear weight count differs from features");
  } else if (const auto* tree = std::get_if<RegressionTree>(&payload_)) {
    check_tree(*tree);
  } else {
    const auto& ens = std::get<BoostedEnsemble>(payload_);
    if (ens.trees.size() != ens.learning_rates.size()) {
      throw DataError("ensemble tree and learning rate counts differ");
    }
    for (const auto& t : ens.trees) check_tree(t);
  }
}

double TrainedModel::predict_row(std::span<const double> x) const {
  if (x.size() != feature_names_.size()) {
    throw DataError("expected " + std::to_string(feature_names_.size()) + " features, got " +
                    std::to_string(x.size()));
  }
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          double out = p.bias;
          for (std::size_t j = 0; j < x.size(); ++j) out += p.weights[j] * x[j];
          return out;
        } else {
          return p.predict(x);
        }
      },
      payload_);
}

namespace {

ordered_json tree_json(const RegressionTree& tree) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : tree.nodes()) {
    if (n.feature < 0) {
      nodes.push_back(ordered_json{{"leaf", n.value}});
    } else {
      nodes.push_back(ordered_json{{"feature", n.feature},
                                   {"threshold", n.threshold},
                                   {"left", n.left},
                                   {"right", n.right}});
    }
  }
  return nodes;
}

RegressionTree tree_from_json(const json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j) {
    TreeNode node;
    if (n.contains("leaf")) {
      node.value = n.at("leaf").get<double>();
    } else {
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
    }
    nodes.push_back(node);
  }
  return RegressionTree(std::move(nodes));
}

constexpr int kModelFormatVersion = 1;

}  // namespace

ordered_json TrainedModel::to_json() const {
  ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["model_type"] = std::string(learner_name(kind_));
  j["feature_names"] = feature_names_;
  j["hyperparams"] = hyperparams_.to_json();
  j["seed"] = hyperparams_.seed;
  ordered_json payload;
  if (const auto* lin = std::get_if<LinearModel>(&payload_)) {
    payload["weights"] = lin->weights;
    payload["bias"] = lin->bias;
    payload["standardized_weights"] = lin->standardized_weights;
  } else if (const auto* tree = std::get_if<RegressionTree>(&payload_)) {
    payload["nodes"] = tree_json(*tree);
  } else {
    const auto& ens = std::get<BoostedEnsemble>(payload_);
    payload["mode"] = ens.mode == BoostMode::Xgb ? "xgb" : "gbdt";
    payload["base_score"] = ens.base_score;
    ordered_json trees = ordered_json::array();
    for (std::size_t t = 0; t < ens.trees.size(); ++t) {
      trees.push_back(
          ordered_json{{"learning_rate", ens.learning_rates[t]}, {"nodes", tree_json(ens.trees[t])}});
    }
    payload["trees"] = std::move(trees);
  }
  j["payload"] = std::move(payload);
  return j;
}

std::string TrainedModel::serialize() const { return to_json().dump(1) + "\n"; }

TrainedModel TrainedModel::from_json(const json& j) {
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw DataError("unsupported model format version");
    }
    const auto type = j.at("model_type").get<std::string>();
    const auto kind = parse_learner(type);
    if (!kind) throw DataError("unknown model_type '" + type + "'");
    auto names = j.at("feature_names").get<std::vector<std::string>>();
    auto hp = Hyperparams::from_json(j.at("hyperparams"));
    const auto& p = j.at("payload");
    switch (*kind) {
      case LearnerKind::Linear: {
        LinearModel lin;
        lin.weights = p.at("weights").get<std::vector<double>>();
        lin.bias = p.at("bias").get<double>();
        lin.standardized_weights = p.at("standardized_weights").get<std::vector<double>>();
        return TrainedModel(*kind, std::move(names), hp, std::move(lin));
      }
      case LearnerKind::Cart:
        return TrainedModel(*kind, std::move(names), hp, tree_from_json(p.at("nodes")));
      case LearnerKind::Gbdt:
      case LearnerKind::Xgb: {
        BoostedEnsemble ens;
        ens.mode = p.at("mode").get<std::string>() == "xgb" ? BoostMode::Xgb : BoostMode::Gbdt;
        ens.base_score = p.at("base_score").get<double>();
        for (const auto& t : p.at("trees")) {
          ens.learning_rates.push_back(t.at("learning_rate").get<double>());
          ens.trees.push_back(tree_from_json(t.at("nodes")));
        }
        return TrainedModel(*kind, std::move(names), hp, std::move(ens));
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  }
  throw DataError("malformed model JSON");
}

TrainedModel TrainedModel::deserialize(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  }
  return from_json(j);
}

// --- tree growing -----------------------------------------------------------

namespace {

void check_inputs(const DesignMatrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) {
    throw DataError("feature matrix has " + std::to_string(x.rows()) + " rows but target has " +
                    std::to_string(y.size()));
  }
  if (x.cols() == 0) throw DataError("feature matrix has no columns");
  x.require_finite();
  for (const double v : y) {
    if (!std::isfinite(v)) throw DataError("target contains a non-finite value");
  }
}

// Column-major copy with every column's rows presorted by value (stable).
struct Presorted {
  std::size_t rows = 0;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::uint32_t>> order;

  explicit Presorted(const DesignMatrix& x) : rows(x.rows()) {
    values.resize(x.cols());
    order.resize(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) {
      values[c] = x.column(c);
      auto& o = order[c];
      o.resize(rows);
      std::iota(o.begin(), o.end(), 0U);
      const auto& v = values[c];
      std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
    }
  }
};

struct GrowParams {
  int max_depth = 1;
  std::size_t min_leaf = 1;
  bool second_order = false;  // XGB gain and leaf weights
  double lambda = 0.0;
  double gamma = 0.0;
};

bool improves(double gain, double best) { return gain > best + 1e-12 * std::abs(best); }

// Grows one tree on `response` (targets or residuals for first-order mode,
// gradients with unit hessians for second-order mode).
class TreeGrower {
 public:
  TreeGrower(const Presorted& data, std::span<const double> response, const GrowParams& params,
             std::vector<std::size_t> features)
      : data_(data), response_(response), params_(params), features_(std::move(features)),
        goes_left_(data.rows, 0) {}

  RegressionTree grow(const std::vector<std::uint32_t>& rows) {
    std::vector<char> in(data_.rows, 0);
    for (const auto r : rows) in[r] = 1;
    std::vector<std::vector<std::uint32_t>> lists(features_.size());
    for (std::size_t k = 0; k < features_.size(); ++k) {
      auto& l = lists[k];
      l.reserve(rows.size());
      for (const auto r : data_.order[features_[k]]) {
        if (in[r]) l.push_back(r);
      }
    }
    nodes_.clear();
    build(rows, std::move(lists), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  double leaf_value(double sum, std::size_t n) const {
    const auto dn = static_cast<double>(n);
    return params_.second_order ? -sum / (dn + params_.lambda) : sum / dn;
  }

  double score(double s, double n) const {
    return params_.second_order ? s * s / (n + params_.lambda) : s * s / n;
  }

  int build(const std::vector<std::uint32_t>& members,
            std::vector<std::vector<std::uint32_t>> lists, int depth) {
    const auto index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const std::size_t n = members.size();
    double sum = 0.0;
    bool constant = true;
    for (const auto r : members) {
      sum += response_[r];
      constant = constant && response_[r] == response_[members.front()];
    }
    nodes_[static_cast<std::size_t>(index)].value = leaf_value(sum, n);
    if (depth >= params_.max_depth || n < 2 * params_.min_leaf || constant) return index;

    const double dn = static_cast<double>(n);
    const double parent = score(sum, dn);
    double best_gain = 0.0;
    std::size_t best_k = 0;
    double best_threshold = 0.0;
    bool found = false;
    for (std::size_t k = 0; k < features_.size(); ++k) {
      const auto& v = data_.values[features_[k]];
      const auto& list = lists[k];
      double left = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left += response_[list[i]];
        const std::size_t nl = i + 1;
        if (nl < params_.min_leaf) continue;
        if (n - nl < params_.min_leaf) break;
        const double a = v[list[i]];
        const double b = v[list[i + 1]];
        if (!(a < b)) continue;
        const double right = sum - left;
        double gain = score(left, static_cast<double>(nl)) +
                      score(right, static_cast<double>(n - nl)) - parent;
        if (params_.second_order) gain = 0.5 * gain - params_.gamma;
        if (gain > 0.0 && improves(gain, best_gain)) {
          best_gain = gain;
          best_k = k;
          const double mid = a + (b - a) / 2.0;
          best_threshold = mid < b ? mid : a;
          found = true;
        }
      }
    }
    if (!found) return index;

    const auto& split_values = data_.values[features_[best_k]];
    for (const auto r : members) goes_left_[r] = split_values[r] <= best_threshold ? 1 : 0;
    std::vector<std::uint32_t> left_members;
    std::vector<std::uint32_t> right_members;
    for (const auto r : members) (goes_left_[r] ? left_members : right_members).push_back(r);
    std::vector<std::vector<std::uint32_t>> left_lists(features_.size());
    std::vector<std::vector<std::uint32_t>> right_lists(features_.size());
    for (std::size_t k = 0; k < features_.size(); ++k) {
      left_lists[k].reserve(left_members.size());
      right_lists[k].reserve(right_members.size());
      for (const auto r : lists[k]) (goes_left_[r] ? left_lists[k] : right_lists[k]).push_back(r);
      std::vector<std::uint32_t>().swap(lists[k]);
    }
    const int l = build(left_members, std::move(left_lists), depth + 1);
    const int r = build(right_members, std::move(right_lists), depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(index)];
    node.feature = static_cast<int>(features_[best_k]);
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    node.value = 0.0;
    return index;
  }

  const Presorted& data_;
  std::span<const double> response_;
  GrowParams params_;
  std::vector<std::size_t> features_;
  std::vector<char> goes_left_;
  std::vector<TreeNode> nodes_;
};

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

// Sorted sample of max(1, round(fraction * n)) indices without replacement.
std::vector<std::size_t> sample_indices(std::size_t n, double fraction, Rng& rng) {
  auto idx = all_indices(n);
  if (fraction >= 1.0) return idx;
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void require_rows(const DesignMatrix& x, const Hyperparams& hp) {
  const auto need = 2 * static_cast<std::size_t>(hp.min_samples_leaf);
  if (x.rows() < need) {
    throw DataError("need at least " + std::to_string(need) + " training rows, got " +
                    std::to_string(x.rows()));
  }
}

TrainedModel fit_boosted(BoostMode mode, const DesignMatrix& x, std::span<const double> y,
                         const Hyperparams& hp) {
  hp.validate();
  check_inputs(x, y);
  require_rows(x, hp);
  const Presorted data(x);
  const std::size_t n = x.rows();

  BoostedEnsemble ens;
  ens.mode = mode;
  ens.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  GrowParams gp;
  gp.max_depth = hp.max_depth;
  gp.min_leaf = static_cast<std::size_t>(hp.min_samples_leaf);
  gp.second_order = mode == BoostMode::Xgb;
  gp.lambda = gp.second_order ? hp.l2_reg : 0.0;
  gp.gamma = gp.second_order ? hp.leaf_penalty : 0.0;

  std::vector<double> pred(n, ens.base_score);
  std::vector<double> response(n);
  for (int round = 0; round < hp.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      response[i] = gp.second_order ? pred[i] - y[i] : y[i] - pred[i];
    }
    Rng row_rng(hp.seed, "subsample", static_cast<std::uint64_t>(round));
    Rng col_rng(hp.seed, "colsample", static_cast<std::uint64_t>(round));
    const auto rows = sample_indices(n, hp.subsample, row_rng);
    auto cols = sample_indices(x.cols(), hp.colsample, col_rng);
    std::vector<std::uint32_t> members(rows.begin(), rows.end());
    TreeGrower grower(data, response, gp, std::move(cols));
    auto tree = grower.grow(members);
    for (std::size_t i = 0; i < n; ++i) pred[i] += hp.learning_rate * tree.predict(x.row(i));
    ens.trees.push_back(std::move(tree));
    ens.learning_rates.push_back(hp.learning_rate);
  }
  const auto kind = mode == BoostMode::Xgb ? LearnerKind::Xgb : LearnerKind::Gbdt;
  return TrainedModel(kind, x.names(), hp, std::move(ens));
}

}  // namespace

TrainedModel fit_cart(const DesignMatrix& x, std::span<const double> y, const Hyperparams& hp) {
  hp.validate();
  check_inputs(x, y);
  require_rows(x, hp);
  const Presorted data(x);
  GrowParams gp;
  gp.max_depth = hp.max_depth;
  gp.min_leaf = static_cast<std::size_t>(hp.min_samples_leaf);
  const auto rows = all_indices(x.rows());
  TreeGrower grower(data, y, gp, all_indices(x.cols()));
  auto tree = grower.grow(std::vector<std::uint32_t>(rows.begin(), rows.end()));
  return TrainedModel(LearnerKind::Cart, x.names(), hp, std::move(tree));
}

TrainedModel fit_gbdt(const DesignMatrix& x, std::span<const double> y, const Hyperparams& hp) {
  return fit_boosted(BoostMode::Gbdt, x, y, hp);
}

TrainedModel fit_xgb(const DesignMatrix& x, std::span<const double> y, const Hyperparams& hp) {
  return fit_boosted(BoostMode::Xgb, x, y, hp);
}

TrainedModel fit_linear(const DesignMatrix& x, std::span<const double> y, const Hyperparams& hp) {
  hp.validate();
  check_inputs(x, y);
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) throw DataError("linear regression needs at least 2 rows");
  const double dn = static_cast<double>(n);

  std::vector<double> mean(d, 0.0);
  std::vector<double> scale(d, 0.0);
  std::vector<char> active(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x(i, j);
    mean[j] = s / dn;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - mean[j]) * (x(i, j) - mean[j]);
    scale[j] = std::sqrt(ss / dn);
    active[j] = scale[j] > 0.0 && std::isfinite(1.0 / scale[j]) ? 1 : 0;
  }
  // Standardized copy, row-major.
  std::vector<double> z(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (active[j]) z[i * d + j] = (x(i, j) - mean[j]) / scale[j];
    }
  }

  const double lr = hp.learning_rate;
  const double lambda = hp.l2_reg;
  double bias = std::accumulate(y.begin(), y.end(), 0.0) / dn;
  std::vector<double> w(d, 0.0);
  std::vector<double> grad(d);
  std::vector<double> resid(n);
  constexpr int kEpochs = 1000;
  for (int epoch = 0; epoch < kEpochs; ++epoch) {
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double p = bias;
      for (std::size_t j = 0; j < d; ++j) p += w[j] * z[i * d + j];
      resid[i] = p - y[i];
      gb += resid[i];
    }
    gb /= dn;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) grad[j] += resid[i] * z[i * d + j];
    }
    double norm2 = gb * gb;
    for (std::size_t j = 0; j < d; ++j) {
      grad[j] /= dn;
      const double full = grad[j] + lambda * w[j];
      norm2 += full * full;
    }
    if (!std::isfinite(norm2)) throw DataError("linear regression diverged; lower learning_rate");
    if (std::sqrt(norm2) < 1e-8) break;
    bias -= lr * gb;
    for (std::size_t j = 0; j < d; ++j) {
      if (active[j]) w[j] = (w[j] - lr * grad[j]) / (1.0 + lr * lambda);
    }
  }

  LinearModel model;
  model.standardized_weights = w;
  model.weights.assign(d, 0.0);
  model.bias = bias;
  for (std::size_t j = 0; j < d; ++j) {
    if (!active[j]) continue;
    model.weights[j] = w[j] / scale[j];
    model.bias -= model.weights[j] * mean[j];
  }
  if (!std::isfinite(model.bias)) throw DataError("linear regression diverged; lower learning_rate");
  return TrainedModel(LearnerKind::Linear, x.names(), hp, std::move(model));
}

TrainedModel fit(LearnerKind kind, const DesignMatrix& x, std::span<const double> y,
                 const Hyperparams& hp) {
  switch (kind) {
    case LearnerKind::Linear: return fit_linear(x, y, hp);
    case LearnerKind::Cart: return fit_cart(x, y, hp);
    case LearnerKind::Gbdt: return fit_gbdt(x, y, hp);
    case LearnerKind::Xgb: return fit_xgb(x, y, hp);
  }
  throw ConfigError("unknown learner");
}

std::vector<double> predict(const TrainedModel& model, const DesignMatrix& x) {
  if (x.cols() != model.feature_names().size()) {
    throw DataError("model expects " + std::to_string(model.feature_names().size()) +
                    " feature columns, got " + std::to_string(x.cols()));
  }
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = model.predict_row(x.row(i));
  return out;
}

Importance importance(const TrainedModel& model) {
  const auto& names = model.feature_names();
  std::vector<double> score(names.size(), 0.0);
  Importance out;
  const auto count = [&](const RegressionTree& tree) {
    for (const auto& n : tree.nodes()) {
      if (n.feature >= 0) score[static_cast<std::size_t>(n.feature)] += 1.0;
    }
  };
  if (const auto* lin = std::get_if<LinearModel>(&model.payload())) {
    out.measure = ImportanceMeasure::AbsStandardizedWeight;
    for (std::size_t j = 0; j < names.size() && j < lin->standardized_weights.size(); ++j) {
      score[j] = std::abs(lin->standardized_weights[j]);
    }
  } else if (const auto* tree = std::get_if<RegressionTree>(&model.payload())) {
    count(*tree);
  } else {
    for (const auto& t : std::get<BoostedEnsemble>(model.payload()).trees) count(t);
  }

  std::vector<double> by_group(kFactorGroups.size(), 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (score[j] == 0.0) continue;
    out.per_feature.emplace_back(names[j], score[j]);
    if (const auto g = feature_group(names[j])) {
      by_group[static_cast<std::size_t>(*g)] += score[j];
      total += score[j];
    }
  }
  if (total > 0.0) {
    for (std::size_t g = 0; g < kFactorGroups.size(); ++g) {
      if (by_group[g] > 0.0) out.group_shares.emplace_back(kFactorGroups[g], 100.0 * by_group[g] / total);
    }
  }
  return out;
}

}  // namespace scifactor
