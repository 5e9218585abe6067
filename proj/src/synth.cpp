#include "scifactor/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "scifactor/error.hpp"
#include "scifactor/rng.hpp"

namespace scifactor {

void SynthConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ConfigError("synth: " + what); };
  if (n_authors == 0) fail("n_authors must be positive");
  if (n_venues == 0) fail("n_venues must be positive");
  if (n_institutions == 0) fail("n_institutions must be positive");
  if (n_keywords == 0) fail("n_keywords must be positive");
  if (end_year < start_year) fail("end year precedes start year");
  if (start_year < 1800 || end_year > 2100) fail("years must lie in [1800, 2100]");
  if (!(papers_per_author_year > 0.0)) fail("papers_per_author_year must be positive");
  if (!(team_size >= 1.0)) fail("team_size must be >= 1");
  if (!(pa_strength >= 0.0) || !std::isfinite(pa_strength)) fail("pa_strength must be >= 0");
  if (!(refs_per_paper >= 0.0) || !std::isfinite(refs_per_paper)) {
    fail("refs_per_paper must be >= 0");
  }
}

namespace {

// Samples indices proportionally to non-negative weights.
class Sampler {
 public:
  Sampler() = default;
  explicit Sampler(const std::vector<double>& weights) { reset(weights); }

  void reset(const std::vector<double>& weights) {
    cumulative_.resize(weights.size());
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      total += weights[i];
      cumulative_[i] = total;
    }
  }

  bool empty() const { return cumulative_.empty() || cumulative_.back() <= 0.0; }

  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                 cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

Sampler zipf(std::size_t n, double exponent) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), exponent);
  return Sampler(w);
}

std::string padded(const char* prefix, std::size_t value, int width) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, value);
  return buf;
}

struct AuthorProfile {
  std::size_t institution;
  int first_year;
  int last_year;
  double productivity;
  double talent;
  std::size_t topic_offset;
  std::vector<std::size_t> venues;
};

constexpr std::size_t kSliceSize = 40;
constexpr std::size_t kMaxTeam = 20;

}  // namespace

Corpus SynthCorpus::to_corpus() const {
  return Corpus::from_records(papers, institutions, gdp);
}

SynthCorpus generate(const SynthConfig& config) {
  config.validate();
  SynthCorpus out;

  const std::size_t n_countries = std::max<std::size_t>(1, config.n_institutions / 15);
  std::vector<std::string> country_ids;
  for (std::size_t c = 0; c < n_countries; ++c) {
    country_ids.push_back(padded("C", c + 1, 3));
    Rng rng(config.seed, "country", c);
    out.gdp.set(country_ids.back(), std::round(std::exp(9.5 + 0.8 * rng.normal())));
  }
  std::vector<std::string> inst_ids;
  for (std::size_t i = 0; i < config.n_institutions; ++i) {
    Rng rng(config.seed, "institution", i);
    inst_ids.push_back(padded("I", i + 1, 5));
    out.institutions.push_back(
        {inst_ids.back(), "Institution " + std::to_string(i + 1),
         country_ids[static_cast<std::size_t>(rng.below(n_countries))], false});
  }
  std::vector<std::string> venue_ids;
  std::vector<double> venue_quality;
  for (std::size_t v = 0; v < config.n_venues; ++v) {
    Rng rng(config.seed, "venue", v);
    venue_ids.push_back(padded("V", v + 1, 4));
    venue_quality.push_back(rng.lognormal(-0.045, 0.3));
  }
  std::vector<std::string> keyword_names;
  for (std::size_t k = 0; k < config.n_keywords; ++k) keyword_names.push_back(padded("kw", k + 1, 5));

  const auto inst_sampler = zipf(config.n_institutions, 1.0);
  const auto venue_sampler = zipf(config.n_venues, 0.8);
  const auto slice = std::min(kSliceSize, config.n_keywords);
  const auto slice_sampler = zipf(slice, 1.0);
  const int span = config.end_year - config.start_year + 1;

  std::vector<AuthorProfile> authors;
  std::vector<std::string> author_ids;
  authors.reserve(config.n_authors);
  for (std::size_t a = 0; a < config.n_authors; ++a) {
    Rng rng(config.seed, "author", a);
    AuthorProfile p;
    p.institution = inst_sampler.sample(rng);
    p.first_year = config.start_year + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
    p.last_year = p.first_year + static_cast<int>(rng.geometric(25.0)) - 1;
    p.productivity = rng.lognormal(-0.125, 0.5);
    p.talent = rng.lognormal(-0.08, 0.4);
    p.topic_offset = static_cast<std::size_t>(rng.below(config.n_keywords));
    for (int i = 0; i < 3; ++i) p.venues.push_back(venue_sampler.sample(rng));
    authors.push_back(std::move(p));
    author_ids.push_back(padded("A", a + 1, 6));
  }

  std::vector<double> fitness;       // per generated paper
  std::vector<std::uint32_t> cites;  // citations received so far
  Sampler ref_sampler;
  std::vector<double> weights;

  for (int year = config.start_year; year <= config.end_year; ++year) {
    const std::size_t available = out.papers.size();
    weights.resize(available);
    for (std::size_t p = 0; p < available; ++p) {
      weights[p] = fitness[p] * std::pow(static_cast<double>(cites[p]) + 1.0, config.pa_strength);
    }
    ref_sampler.reset(weights);

    std::vector<std::size_t> active;
    std::vector<std::vector<std::size_t>> active_by_inst(config.n_institutions);
    for (std::size_t a = 0; a < authors.size(); ++a) {
      if (authors[a].first_year <= year && year <= authors[a].last_year) {
        active.push_back(a);
        active_by_inst[authors[a].institution].push_back(a);
      }
    }

    std::vector<std::size_t> new_refs;
    for (const std::size_t lead : active) {
      const auto& prof = authors[lead];
      Rng rng(config.seed, "papers",
              (static_cast<std::uint64_t>(year - config.start_year) << 32) | lead);
      const auto count = rng.poisson(config.papers_per_author_year * prof.productivity);
      for (std::uint32_t k = 0; k < count; ++k) {
        PaperRecord paper;
        paper.id = padded("P", out.papers.size() + 1, 8);
        paper.year = year;
        const auto venue = prof.venues[static_cast<std::size_t>(rng.below(prof.venues.size()))];
        paper.venue = venue_ids[venue];

        std::vector<std::size_t> team{lead};
        const auto size = std::min<std::size_t>(kMaxTeam, rng.geometric(config.team_size));
        for (std::size_t attempt = 0; team.size() < size && attempt < 10 * size; ++attempt) {
          const auto& local = active_by_inst[prof.institution];
          const auto& pool = (rng.uniform() < 0.6 && local.size() > 1) ? local : active;
          const auto cand = pool[static_cast<std::size_t>(rng.below(pool.size()))];
          if (std::find(team.begin(), team.end(), cand) == team.end()) team.push_back(cand);
        }
        for (const auto a : team) {
          paper.authorships.push_back(
              {author_ids[a], "Author " + std::to_string(a + 1), inst_ids[authors[a].institution]});
        }

        const auto draw_term = [&] {
          return (prof.topic_offset + slice_sampler.sample(rng)) % config.n_keywords;
        };
        std::set<std::size_t> kw;
        const auto n_kw = std::min<std::size_t>(slice, 2 + rng.below(3));
        for (std::size_t attempt = 0; kw.size() < n_kw && attempt < 50; ++attempt) kw.insert(draw_term());
        for (const auto t : kw) paper.keywords.push_back(keyword_names[t]);
        for (int w = 0; w < 3; ++w) {
          if (w > 0) paper.title += ' ';
          paper.title += keyword_names[draw_term()];
        }

        auto n_refs = static_cast<std::size_t>(rng.poisson(config.refs_per_paper));
        bool truncated = false;
        if (n_refs > available) {
          n_refs = available;
          truncated = true;
        }
        std::set<std::size_t> refs;
        if (n_refs > 0 && !ref_sampler.empty()) {
          for (std::size_t attempt = 0; refs.size() < n_refs && attempt < 50 * n_refs; ++attempt) {
            refs.insert(ref_sampler.sample(rng));
          }
        }
        if (refs.size() < n_refs) truncated = true;
        if (truncated) ++out.truncated_papers;
        for (const auto r : refs) {
          paper.references.push_back(out.papers[r].id);
          new_refs.push_back(r);
        }

        fitness.push_back(prof.talent * venue_quality[venue]);
        cites.push_back(0);
        out.papers.push_back(std::move(paper));
      }
    }
    for (const auto r : new_refs) ++cites[r];
  }

  if (out.papers.empty()) throw ConfigError("synth: configuration produced no papers");
  if (out.truncated_papers > 0) {
    out.warnings.push_back(std::to_string(out.truncated_papers) +
                           " papers received fewer references than drawn (too few earlier papers)");
  }
  return out;
}

void write_synth(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
  const auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw DataError("cannot write " + (dir / name).string());
    return f;
  };
  auto papers = open("papers.jsonl");
  write_papers_jsonl(papers, corpus.papers);
  auto institutions = open("institutions.jsonl");
  write_institutions_jsonl(institutions, corpus.institutions);
  auto gdp = open("gdp.csv");
  write_gdp_csv(gdp, corpus.gdp);
  if (!papers || !institutions || !gdp) throw DataError("failed writing corpus files");
}

}  // namespace scifactor
