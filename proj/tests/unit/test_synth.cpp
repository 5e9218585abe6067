#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "scifactor/corpus.hpp"
#include "scifactor/error.hpp"
#include "scifactor/synth.hpp"

using namespace scifactor;
namespace fs = std::filesystem;

namespace {

SynthConfig small(std::uint64_t seed = 7) {
  SynthConfig c;
  c.n_authors = 300;
  c.n_venues = 8;
  c.n_institutions = 30;
  c.n_keywords = 200;
  c.start_year = 2000;
  c.end_year = 2010;
  c.seed = seed;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::size_t> in_degrees(const Corpus& c) {
  std::vector<std::size_t> deg(c.paper_count(), 0);
  for (PaperIndex p = 0; p < c.paper_count(); ++p) {
    for (const auto r : c.references(p)) ++deg[r];
  }
  return deg;
}

}  // namespace

TEST_CASE("generation is deterministic and files are byte-identical") {
  const auto a = generate(small());
  const auto b = generate(small());
  REQUIRE(a.papers.size() == b.papers.size());
  const auto dir = fs::temp_directory_path() / "scifactor_synth_test";
  fs::remove_all(dir);
  write_synth(a, dir / "a");
  write_synth(b, dir / "b");
  for (const char* f : {"papers.jsonl", "institutions.jsonl", "gdp.csv"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK_FALSE(slurp(dir / "a" / f).empty());
  }
  const auto other = generate(small(8));
  CHECK(slurp(dir / "a" / "papers.jsonl") != [&] {
    write_synth(other, dir / "c");
    return slurp(dir / "c" / "papers.jsonl");
  }());
  const auto loaded = load_corpus(dir / "a" / "papers.jsonl", dir / "a" / "institutions.jsonl",
                                  dir / "a" / "gdp.csv");
  CHECK(loaded.paper_count() == a.papers.size());
  CHECK(loaded.load_report().warning_count() == 0);
  fs::remove_all(dir);
}

TEST_CASE("generated corpus loads cleanly and respects time") {
  const auto s = generate(small());
  const auto c = s.to_corpus();
  const auto& rep = c.load_report();
  CHECK(rep.warning_count() == 0);
  CHECK(rep.dangling_references == 0);
  CHECK(rep.self_references == 0);
  CHECK(rep.duplicate_references == 0);
  CHECK(rep.unresolved_institutions == 0);
  CHECK(c.paper_count() > 500);
  CHECK(c.citation_edge_count() > 1000);
  for (PaperIndex p = 0; p < c.paper_count(); ++p) {
    for (const auto r : c.references(p)) CHECK(c.paper(r).year < c.paper(p).year);
    CHECK(c.paper(p).year >= 2000);
    CHECK(c.paper(p).year <= 2010);
    CHECK_FALSE(c.keyword_terms(p).empty());
  }
  // Every country has a GDP entry.
  for (InstitutionIndex i = 0; i < c.institution_count(); ++i) {
    CHECK(c.gdp().find(c.institution(i).country).has_value());
  }
  // Institution sizes are skewed.
  std::map<std::string, std::size_t> sizes;
  const CorpusSnapshot snap(c, 2010);
  for (const auto a : snap.authors()) {
    if (const auto inst = snap.author_institution(a)) ++sizes[c.institution(*inst).id];
  }
  std::vector<std::size_t> v;
  for (const auto& [k, n] : sizes) v.push_back(n);
  std::sort(v.rbegin(), v.rend());
  REQUIRE(v.size() > 3);
  CHECK(v.front() > 3 * v.back());
}

TEST_CASE("single-year corpus has no citations") {
  auto cfg = small();
  cfg.start_year = cfg.end_year = 2000;
  const auto s = generate(cfg);
  CHECK_FALSE(s.papers.empty());
  CHECK(s.to_corpus().citation_edge_count() == 0);
  CHECK(s.truncated_papers > 0);
  CHECK_FALSE(s.warnings.empty());
}

TEST_CASE("preferential attachment produces a heavier in-degree tail") {
  auto flat = small(11);
  flat.pa_strength = 0;
  auto skewed = small(11);
  skewed.pa_strength = 2;
  const auto d0 = in_degrees(generate(flat).to_corpus());
  const auto d2 = in_degrees(generate(skewed).to_corpus());
  const auto max0 = *std::max_element(d0.begin(), d0.end());
  const auto max2 = *std::max_element(d2.begin(), d2.end());
  CHECK(max0 < max2);
  auto ratio = [](const std::vector<std::size_t>& d) {
    double mean = 0;
    for (auto x : d) mean += static_cast<double>(x);
    mean /= static_cast<double>(d.size());
    return static_cast<double>(*std::max_element(d.begin(), d.end())) / mean;
  };
  CHECK(ratio(d0) < ratio(d2));
}

TEST_CASE("invalid synth configs are rejected") {
  auto c = small();
  c.n_authors = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small();
  c.end_year = 1999;
  CHECK_THROWS_AS(generate(c), ConfigError);
  c = small();
  c.team_size = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small();
  c.pa_strength = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
