#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scifactor/corpus.hpp"

namespace scifactor {

struct SynthConfig {
  std::size_t n_authors = 5000;
  std::size_t n_venues = 60;
  std::size_t n_institutions = 300;
  std::size_t n_keywords = 3000;
  int start_year = 1990;
  int end_year = 2015;
  double papers_per_author_year = 0.5;  // Poisson mean of led papers
  double team_size = 2.5;               // geometric mean, >= 1
  double pa_strength = 1.0;             // exponent on (citations + 1)
  double refs_per_paper = 8.0;          // Poisson mean
  std::uint64_t seed = 42;

  // Throws ConfigError.
  void validate() const;
};

struct SynthCorpus {
  std::vector<PaperRecord> papers;
  std::vector<InstitutionRecord> institutions;
  GdpTable gdp;
  std::size_t truncated_papers = 0;  // papers that got fewer references than drawn
  std::vector<std::string> warnings;

  Corpus to_corpus() const;
};

// Deterministic for a given config. Authors, institutions and keyword slices
// draw from per-entity streams; citations prefer already-cited papers from
// strictly earlier years.
SynthCorpus generate(const SynthConfig& config);

// Writes papers.jsonl, institutions.jsonl and gdp.csv into `dir`.
void write_synth(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace scifactor
