#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scifactor/eval.hpp"
#include "scifactor/features.hpp"
#include "scifactor/learners.hpp"
#include "scifactor/synth.hpp"

namespace scifactor {

// A small TOML subset: [section] / [section.sub] headers, `key = value`
// pairs, '#' comments. Values are numbers, booleans, "strings", or flat
// arrays of numbers or strings.
using ConfigValue =
    std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;

class ConfigFile {
 public:
  using Section = std::map<std::string, ConfigValue>;

  // Throws ConfigError with the line number on malformed input.
  static ConfigFile parse(std::istream& in, const std::string& source = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  // "" is the top-level section.
  const std::map<std::string, Section>& sections() const { return sections_; }
  const Section* section(const std::string& name) const;

 private:
  std::map<std::string, Section> sections_;
};

struct RunConfig {
  int cutoff_year = 2012;
  int target_year = 2015;
  int delta_t = 7;
  std::vector<int> eval_delta_ts;  // defaults to {delta_t}
  LearnerKind learner = LearnerKind::Xgb;
  std::vector<LearnerKind> eval_learners;  // defaults to {learner}
  double acc_tolerance = 1.0;
  VenueScore venue_score = VenueScore::PageRank;
  bool include_pr_pub = false;
  std::uint64_t seed = 42;
  std::size_t folds = 5;
  double test_fraction = 0.2;

  // Shared values first, then per-learner overrides.
  std::map<std::string, double> hyperparams;
  std::map<LearnerKind, std::map<std::string, double>> learner_hyperparams;
  Grid grid;
  std::map<LearnerKind, Grid> learner_grid;

  SynthConfig synth;
  bool synth_seed_set = false;

  // Hyperparams with the learner seed fanned out from `seed` unless the
  // configuration sets one explicitly.
  Hyperparams hyperparams_for(LearnerKind kind) const;
  // Per-learner grid if present, else the shared grid.
  Grid grid_for(LearnerKind kind) const;
  SynthConfig synth_config() const;
  FeatureConfig feature_config(unsigned threads) const;

  std::vector<int> delta_ts() const;
  std::vector<LearnerKind> learners() const;

  std::uint64_t fold_seed() const;
  std::uint64_t holdout_seed() const;

  // Throws ConfigError naming offending values.
  void validate() const;
};

// Applies a parsed file on top of `base`. Unknown keys raise ConfigError.
RunConfig apply_config(const ConfigFile& file, RunConfig base = {});

}  // namespace scifactor
