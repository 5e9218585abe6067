#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scifactor/catalog.hpp"
#include "scifactor/matrix.hpp"

namespace scifactor {

enum class LearnerKind { Linear, Cart, Gbdt, Xgb };

// "lr", "cart", "gbdt", "xgb".
std::string_view learner_name(LearnerKind kind);
// Accepts the short names above (and "linear").
std::optional<LearnerKind> parse_learner(std::string_view name);

struct Hyperparams {
  double learning_rate = 0.1;
  int max_depth = 6;
  int n_trees = 100;
  double subsample = 1.0;
  double colsample = 1.0;
  double l2_reg = 1.0;        // lambda
  double leaf_penalty = 0.0;  // gamma
  int min_samples_leaf = 1;
  std::uint64_t seed = 0;

  // Throws ConfigError on out-of-range values.
  void validate() const;
  // Sets a field by name ("lambda"/"gamma" are accepted aliases). Integer
  // fields reject non-integral values.
  void set(std::string_view name, double value);
  static const std::vector<std::string>& field_names();

  nlohmann::ordered_json to_json() const;
  static Hyperparams from_json(const nlohmann::json& j);
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf prediction
};

// Rows with x[feature] <= threshold go left.
class RegressionTree {
 public:
  RegressionTree() : nodes_{TreeNode{}} {}
  explicit RegressionTree(std::vector<TreeNode> nodes);

  double predict(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<TreeNode> nodes_;
};

enum class BoostMode { Gbdt, Xgb };

struct BoostedEnsemble {
  double base_score = 0.0;
  BoostMode mode = BoostMode::Gbdt;
  std::vector<RegressionTree> trees;
  std::vector<double> learning_rates;  // one per tree

  double predict(std::span<const double> x) const;
};

struct LinearModel {
  std::vector<double> weights;  // original feature units
  double bias = 0.0;
  std::vector<double> standardized_weights;  // weights on z-scored columns
};

class TrainedModel {
 public:
  using Payload = std::variant<LinearModel, RegressionTree, BoostedEnsemble>;

  TrainedModel(LearnerKind kind, std::vector<std::string> feature_names, Hyperparams hyperparams,
               Payload payload);

  LearnerKind kind() const { return kind_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const Hyperparams& hyperparams() const { return hyperparams_; }
  const Payload& payload() const { return payload_; }

  double predict_row(std::span<const double> x) const;

  // Versioned JSON with model_type, feature_names, hyperparams, seed, payload.
  nlohmann::ordered_json to_json() const;
  std::string serialize() const;
  static TrainedModel from_json(const nlohmann::json& j);
  static TrainedModel deserialize(std::string_view text);

 private:
  LearnerKind kind_;
  std::vector<std::string> feature_names_;
  Hyperparams hyperparams_;
  Payload payload_;
};

// All learners take a row-major design matrix and a target of equal length.
// Non-finite inputs raise DataError.
TrainedModel fit_linear(const DesignMatrix& x, std::span<const double> y, const Hyperparams& hp);
TrainedModel fit_cart(const DesignMatrix& x, std::span<const double> y, const Hyperparams& hp);
TrainedModel fit_gbdt(const DesignMatrix& x, std::span<const double> y, const Hyperparams& hp);
TrainedModel fit_xgb(const DesignMatrix& x, std::span<const double> y, const Hyperparams& hp);
TrainedModel fit(LearnerKind kind, const DesignMatrix& x, std::span<const double> y,
                 const Hyperparams& hp);

// Throws DataError when the column count differs from the model's features.
std::vector<double> predict(const TrainedModel& model, const DesignMatrix& x);

enum class ImportanceMeasure { SplitCount, AbsStandardizedWeight };

struct Importance {
  ImportanceMeasure measure = ImportanceMeasure::SplitCount;
  // Features with a nonzero score, in model column order.
  std::vector<std::pair<std::string, double>> per_feature;
  // Percent of the total score per factor group (groups with nonzero score
  // only, in group order). Features outside the catalog are not counted.
  std::vector<std::pair<FactorGroup, double>> group_shares;
};

// Split counts for tree models; linear models report |standardized weight|
// and are flagged with ImportanceMeasure::AbsStandardizedWeight.
Importance importance(const TrainedModel& model);

}  // namespace scifactor
