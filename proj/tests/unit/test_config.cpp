#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "scifactor/config.hpp"
#include "scifactor/error.hpp"
#include "scifactor/rng.hpp"

using namespace scifactor;

namespace {

ConfigFile parse(const std::string& text) {
  std::istringstream in(text);
  return ConfigFile::parse(in, "test.toml");
}

std::string error_of(const std::string& text) {
  try {
    apply_config(parse(text)).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parser reads values, arrays, sections and comments") {
  const auto f = parse(R"(
# comment
cutoff_year = 2010   # trailing
learner = "gbdt"
include_pr_pub = true
eval_learners = ["lr", "xgb"]

[grid]
max_depth = [3, 6]
learning_rate = [0.05, 0.1]

[hyperparams.xgb]
lambda = 2.5
)");
  const auto* top = f.section("");
  REQUIRE(top);
  CHECK(std::get<double>(top->at("cutoff_year")) == 2010);
  CHECK(std::get<std::string>(top->at("learner")) == "gbdt");
  CHECK(std::get<bool>(top->at("include_pr_pub")));
  CHECK(std::get<std::vector<std::string>>(top->at("eval_learners")).size() == 2);
  CHECK(std::get<std::vector<double>>(f.section("grid")->at("max_depth")) == std::vector<double>{3, 6});
  CHECK(f.section("hyperparams.xgb") != nullptr);
  CHECK(f.section("missing") == nullptr);
}

TEST_CASE("parser errors carry the line number") {
  for (const char* bad : {"x = ", "[grid\n", "= 3", "a = [1, \"b\"]", "a = 1\na = 2", "a = \"open",
                          "a = 1 2", "[s]\n[s]"}) {
    try {
      parse(bad);
      FAIL("expected ConfigError for: " << bad);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("test.toml:") != std::string::npos);
    }
  }
}

TEST_CASE("apply_config overrides defaults and fans out seeds") {
  const RunConfig defaults;
  CHECK(defaults.cutoff_year == 2012);
  CHECK(defaults.target_year == 2015);
  CHECK(defaults.delta_t == 7);
  CHECK(defaults.learner == LearnerKind::Xgb);
  CHECK(defaults.delta_ts() == std::vector<int>{7});
  CHECK(defaults.learners() == std::vector<LearnerKind>{LearnerKind::Xgb});

  const auto cfg = apply_config(parse(R"(
seed = 9
delta_t = 3
eval_delta_ts = [1, 3]
venue_score = "eq4_sum"
[hyperparams]
max_depth = 4
[hyperparams.cart]
max_depth = 2
[grid]
gamma = [0, 1]
[grid.lr]
lambda = [0, 10]
[synth]
n_authors = 100
)"));
  CHECK(cfg.seed == 9);
  CHECK(cfg.delta_ts() == std::vector<int>{1, 3});
  CHECK(cfg.venue_score == VenueScore::Eq4Sum);
  CHECK(cfg.hyperparams_for(LearnerKind::Xgb).max_depth == 4);
  CHECK(cfg.hyperparams_for(LearnerKind::Cart).max_depth == 2);
  CHECK(cfg.hyperparams_for(LearnerKind::Xgb).seed == derive_seed(9, "learner"));
  CHECK(cfg.grid_for(LearnerKind::Xgb).count("leaf_penalty") == 1);
  CHECK(cfg.grid_for(LearnerKind::Linear).count("l2_reg") == 1);
  CHECK(cfg.synth_config().n_authors == 100);
  CHECK(cfg.synth_config().seed == derive_seed(9, "corpus"));
  CHECK(cfg.fold_seed() != cfg.holdout_seed());

  const auto pinned = apply_config(parse("[synth]\nseed = 5\n[hyperparams]\nseed = 3\n"));
  CHECK(pinned.synth_config().seed == 5);
  CHECK(pinned.hyperparams_for(LearnerKind::Gbdt).seed == 3);
}

TEST_CASE("invalid configurations raise ConfigError") {
  const auto msg = error_of("cutoff_year = 2015\ntarget_year = 2010\n");
  CHECK(msg.find("2015") != std::string::npos);
  CHECK(msg.find("2010") != std::string::npos);
  CHECK_FALSE(error_of("bogus = 1").empty());
  CHECK_FALSE(error_of("[mystery]\na = 1").empty());
  CHECK_FALSE(error_of("[hyperparams]\nwidth = 1").empty());
  CHECK_FALSE(error_of("[hyperparams.svm]\nmax_depth = 1").empty());
  CHECK_FALSE(error_of("learner = \"svm\"").empty());
  CHECK_FALSE(error_of("delta_t = 0").empty());
  CHECK_FALSE(error_of("delta_t = 2.5").empty());
  CHECK_FALSE(error_of("folds = 1").empty());
  CHECK_FALSE(error_of("test_fraction = 1.5").empty());
  CHECK_FALSE(error_of("[hyperparams]\nsubsample = 0").empty());
  CHECK_FALSE(error_of("cutoff_year = \"x\"").empty());
  CHECK_FALSE(error_of("[synth]\nfoo = 1").empty());
  CHECK_THROWS_AS(ConfigFile::load("/nonexistent/config.toml"), ConfigError);
}
