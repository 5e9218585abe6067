#include "scifactor/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>

#include "scifactor/error.hpp"
#include "scifactor/rng.hpp"

namespace scifactor {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class LineParser {
 public:
  LineParser(std::string_view text, std::string where) : text_(text), where_(std::move(where)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(where_ + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool at_end() {
    skip_space();
    return pos_ >= text_.size() || text_[pos_] == '#';
  }

  std::string parse_string() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
        const char c = text_[++pos_];
        out.push_back(c == 'n' ? '\n' : c == 't' ? '\t' : c);
      } else {
        out.push_back(text_[pos_]);
      }
      ++pos_;
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string bare_token() {
    const auto start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ',' || c == ']' || c == ' ' || c == '\t' || c == '#') break;
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  double parse_number() {
    const auto token = bare_token();
    if (token.empty()) fail("expected a value");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || !std::isfinite(v)) {
      fail("invalid value '" + token + "'");
    }
    return v;
  }

  ConfigValue parse_value() {
    skip_space();
    if (pos_ >= text_.size()) fail("missing value");
    const char c = text_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return parse_number();
  }

  ConfigValue parse_array() {
    ++pos_;
    std::vector<double> numbers;
    std::vector<std::string> strings;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) fail("unterminated array");
      if (text_[pos_] == ']') {
        ++pos_;
        break;
      }
      if (text_[pos_] == '"') {
        strings.push_back(parse_string());
      } else {
        numbers.push_back(parse_number());
      }
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == ',') ++pos_;
    }
    if (!numbers.empty() && !strings.empty()) fail("arrays must not mix numbers and strings");
    if (!strings.empty()) return strings;
    return numbers;
  }

 private:
  std::string_view text_;
  std::string where_;
  std::size_t pos_ = 0;
};

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (const char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
      return false;
    }
  }
  return true;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile cfg;
  std::string current;
  cfg.sections_[current];
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (text.front() == '[') {
      const auto close = text.find(']');
      if (close == std::string::npos) throw ConfigError(where + ": unterminated section header");
      const auto rest = trim(std::string_view(text).substr(close + 1));
      if (!rest.empty() && rest.front() != '#') {
        throw ConfigError(where + ": unexpected text after section header");
      }
      current = trim(std::string_view(text).substr(1, close - 1));
      if (!valid_key(current)) throw ConfigError(where + ": invalid section name");
      if (cfg.sections_.count(current) != 0) {
        throw ConfigError(where + ": duplicate section [" + current + "]");
      }
      cfg.sections_[current];
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const auto key = trim(std::string_view(text).substr(0, eq));
    if (!valid_key(key)) throw ConfigError(where + ": invalid key '" + key + "'");
    LineParser p(std::string_view(text).substr(eq + 1), where);
    auto value = p.parse_value();
    if (!p.at_end()) p.fail("unexpected text after value");
    auto& section = cfg.sections_[current];
    if (section.count(key) != 0) throw ConfigError(where + ": duplicate key '" + key + "'");
    section.emplace(key, std::move(value));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

const ConfigFile::Section* ConfigFile::section(const std::string& name) const {
  const auto it = sections_.find(name);
  return it == sections_.end() ? nullptr : &it->second;
}

// --- RunConfig --------------------------------------------------------------

namespace {

const std::string& key_context(const std::string& section) {
  static const std::string top = "top level";
  return section.empty() ? top : section;
}

double number(const ConfigValue& v, const std::string& section, const std::string& key) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw ConfigError("config " + key_context(section) + ": '" + key + "' must be a number");
}

long long integer(const ConfigValue& v, const std::string& section, const std::string& key) {
  const double d = number(v, section, key);
  if (d != std::floor(d) || std::abs(d) > 9e15) {
    throw ConfigError("config " + key_context(section) + ": '" + key + "' must be an integer");
  }
  return static_cast<long long>(d);
}

std::size_t count(const ConfigValue& v, const std::string& section, const std::string& key) {
  const auto i = integer(v, section, key);
  if (i < 0) {
    throw ConfigError("config " + key_context(section) + ": '" + key + "' must be non-negative");
  }
  return static_cast<std::size_t>(i);
}

bool boolean(const ConfigValue& v, const std::string& section, const std::string& key) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw ConfigError("config " + key_context(section) + ": '" + key + "' must be true or false");
}

std::string string_value(const ConfigValue& v, const std::string& section,
                         const std::string& key) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError("config " + key_context(section) + ": '" + key + "' must be a string");
}

std::vector<std::string> strings(const ConfigValue& v, const std::string& section,
                                 const std::string& key) {
  if (const auto* s = std::get_if<std::vector<std::string>>(&v)) return *s;
  if (const auto* s = std::get_if<std::string>(&v)) return {*s};
  throw ConfigError("config " + key_context(section) + ": '" + key + "' must be string list");
}

std::vector<double> numbers(const ConfigValue& v, const std::string& section,
                            const std::string& key) {
  if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
  if (const auto* d = std::get_if<double>(&v)) return {*d};
  throw ConfigError("config " + key_context(section) + ": '" + key + "' must be a number list");
}

LearnerKind learner_value(const std::string& name) {
  const auto kind = parse_learner(name);
  if (!kind) throw ConfigError("unknown learner '" + name + "' (expected lr, cart, gbdt or xgb)");
  return *kind;
}

std::string canonical_hyperparam(const std::string& key) {
  Hyperparams probe;
  probe.set(key, key == "seed" ? 0.0 : 1.0);  // throws on unknown names
  if (key == "lambda") return "l2_reg";
  if (key == "gamma") return "leaf_penalty";
  return key;
}

void apply_hyperparams(const ConfigFile::Section& s, const std::string& name,
                       std::map<std::string, double>& out) {
  for (const auto& [key, value] : s) {
    out[canonical_hyperparam(key)] = number(value, name, key);
  }
}

void apply_grid(const ConfigFile::Section& s, const std::string& name, Grid& out) {
  for (const auto& [key, value] : s) {
    auto values = numbers(value, name, key);
    if (values.empty()) throw ConfigError("config " + name + ": '" + key + "' has no values");
    out[canonical_hyperparam(key)] = std::move(values);
  }
}

}  // namespace

RunConfig apply_config(const ConfigFile& file, RunConfig cfg) {
  for (const auto& [name, section] : file.sections()) {
    if (name.empty()) {
      for (const auto& [key, v] : section) {
        if (key == "cutoff_year") {
          cfg.cutoff_year = static_cast<int>(integer(v, name, key));
        } else if (key == "target_year") {
          cfg.target_year = static_cast<int>(integer(v, name, key));
        } else if (key == "delta_t") {
          cfg.delta_t = static_cast<int>(integer(v, name, key));
        } else if (key == "eval_delta_ts") {
          cfg.eval_delta_ts.clear();
          for (const double d : numbers(v, name, key)) {
            if (d != std::floor(d)) throw ConfigError("config: eval_delta_ts must be integers");
            cfg.eval_delta_ts.push_back(static_cast<int>(d));
          }
        } else if (key == "learner") {
          cfg.learner = learner_value(string_value(v, name, key));
        } else if (key == "eval_learners") {
          cfg.eval_learners.clear();
          for (const auto& s : strings(v, name, key)) cfg.eval_learners.push_back(learner_value(s));
        } else if (key == "acc_tolerance") {
          cfg.acc_tolerance = number(v, name, key);
        } else if (key == "venue_score") {
          const auto s = string_value(v, name, key);
          if (s == "pagerank") {
            cfg.venue_score = VenueScore::PageRank;
          } else if (s == "eq4_sum") {
            cfg.venue_score = VenueScore::Eq4Sum;
          } else {
            throw ConfigError("config: venue_score must be \"pagerank\" or \"eq4_sum\"");
          }
        } else if (key == "include_pr_pub") {
          cfg.include_pr_pub = boolean(v, name, key);
        } else if (key == "seed") {
          cfg.seed = static_cast<std::uint64_t>(count(v, name, key));
        } else if (key == "folds") {
          cfg.folds = count(v, name, key);
        } else if (key == "test_fraction") {
          cfg.test_fraction = number(v, name, key);
        } else {
          throw ConfigError("config: unknown key '" + key + "'");
        }
      }
    } else if (name == "hyperparams") {
      apply_hyperparams(section, name, cfg.hyperparams);
    } else if (name.rfind("hyperparams.", 0) == 0) {
      apply_hyperparams(section, name, cfg.learner_hyperparams[learner_value(name.substr(12))]);
    } else if (name == "grid") {
      apply_grid(section, name, cfg.grid);
    } else if (name.rfind("grid.", 0) == 0) {
      apply_grid(section, name, cfg.learner_grid[learner_value(name.substr(5))]);
    } else if (name == "synth") {
      auto& s = cfg.synth;
      for (const auto& [key, v] : section) {
        if (key == "n_authors") {
          s.n_authors = count(v, name, key);
        } else if (key == "n_venues") {
          s.n_venues = count(v, name, key);
        } else if (key == "n_institutions") {
          s.n_institutions = count(v, name, key);
        } else if (key == "n_keywords") {
          s.n_keywords = count(v, name, key);
        } else if (key == "start_year") {
          s.start_year = static_cast<int>(integer(v, name, key));
        } else if (key == "end_year") {
          s.end_year = static_cast<int>(integer(v, name, key));
        } else if (key == "papers_per_author_year") {
          s.papers_per_author_year = number(v, name, key);
        } else if (key == "team_size") {
          s.team_size = number(v, name, key);
        } else if (key == "pa_strength") {
          s.pa_strength = number(v, name, key);
        } else if (key == "refs_per_paper") {
          s.refs_per_paper = number(v, name, key);
        } else if (key == "seed") {
          s.seed = static_cast<std::uint64_t>(count(v, name, key));
          cfg.synth_seed_set = true;
        } else {
          throw ConfigError("config [synth]: unknown key '" + key + "'");
        }
      }
    } else {
      throw ConfigError("config: unknown section [" + name + "]");
    }
  }
  return cfg;
}

Hyperparams RunConfig::hyperparams_for(LearnerKind kind) const {
  Hyperparams hp;
  hp.seed = derive_seed(seed, "learner");
  for (const auto& [key, value] : hyperparams) hp.set(key, value);
  if (const auto it = learner_hyperparams.find(kind); it != learner_hyperparams.end()) {
    for (const auto& [key, value] : it->second) hp.set(key, value);
  }
  return hp;
}

Grid RunConfig::grid_for(LearnerKind kind) const {
  if (const auto it = learner_grid.find(kind); it != learner_grid.end()) return it->second;
  return grid;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig s = synth;
  if (!synth_seed_set) s.seed = derive_seed(seed, "corpus");
  return s;
}

FeatureConfig RunConfig::feature_config(unsigned threads) const {
  FeatureConfig f;
  f.venue_score = venue_score;
  f.include_pr_pub = include_pr_pub;
  f.threads = threads;
  return f;
}

std::vector<int> RunConfig::delta_ts() const {
  return eval_delta_ts.empty() ? std::vector<int>{delta_t} : eval_delta_ts;
}

std::vector<LearnerKind> RunConfig::learners() const {
  return eval_learners.empty() ? std::vector<LearnerKind>{learner} : eval_learners;
}

std::uint64_t RunConfig::fold_seed() const { return derive_seed(seed, "folds"); }
std::uint64_t RunConfig::holdout_seed() const { return derive_seed(seed, "holdout"); }

void RunConfig::validate() const {
  if (cutoff_year >= target_year) {
    throw ConfigError("cutoff year " + std::to_string(cutoff_year) +
                      " must be earlier than target year " + std::to_string(target_year));
  }
  for (const int d : delta_ts()) {
    if (d <= 0) throw ConfigError("delta_t must be positive, got " + std::to_string(d));
  }
  if (delta_t <= 0) throw ConfigError("delta_t must be positive, got " + std::to_string(delta_t));
  if (!(acc_tolerance >= 0.0)) throw ConfigError("acc_tolerance must be >= 0");
  if (folds < 2) throw ConfigError("folds must be >= 2");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must be in (0, 1)");
  }
  for (const auto kind : {LearnerKind::Linear, LearnerKind::Cart, LearnerKind::Gbdt,
                          LearnerKind::Xgb}) {
    hyperparams_for(kind).validate();
  }
}

}  // namespace scifactor
