#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scifactor/catalog.hpp"
#include "scifactor/corpus.hpp"
#include "scifactor/graphs.hpp"
#include "scifactor/matrix.hpp"

namespace scifactor {

enum class VenueScore { PageRank, Eq4Sum };

struct FeatureConfig {
  VenueScore venue_score = VenueScore::PageRank;
  bool include_pr_pub = false;
  PageRankParams pagerank;
  unsigned threads = 1;
};

// Per-snapshot quantities that the per-author factors are built from.
class SnapshotMetrics {
 public:
  SnapshotMetrics(const CorpusSnapshot& snap, const FeatureConfig& config);

  const CorpusSnapshot& snapshot() const { return *snap_; }

  // Indexed by corpus AuthorIndex; zero for authors outside the snapshot.
  std::span<const std::uint32_t> author_h() const { return author_h_; }
  std::span<const double> author_citations() const { return author_citations_; }
  std::span<const double> author_papers() const { return author_papers_; }
  std::span<const double> author_pagerank() const { return author_pagerank_; }

  // Indexed by corpus VenueIndex.
  std::span<const double> venue_pagerank() const { return venue_pagerank_; }
  std::span<const double> venue_eq4_sum() const { return venue_eq4_; }
  std::span<const double> venue_mean_citations() const { return venue_mean_citations_; }
  std::span<const std::uint32_t> venue_h() const { return venue_h_; }

  // Indexed by corpus PaperIndex; empty unless include_pr_pub is set.
  std::span<const double> paper_pagerank() const { return paper_pagerank_; }

  double mu_p() const { return mu_p_; }

 private:
  const CorpusSnapshot* snap_;
  std::vector<std::uint32_t> author_h_;
  std::vector<double> author_citations_;
  std::vector<double> author_papers_;
  std::vector<double> author_pagerank_;
  std::vector<double> venue_pagerank_;
  std::vector<double> venue_eq4_;
  std::vector<double> venue_mean_citations_;
  std::vector<std::uint32_t> venue_h_;
  std::vector<double> paper_pagerank_;
  double mu_p_ = 0.0;
};

// --- per-paper factors ------------------------------------------------------

// Sum over the paper's distinct keywords of their snapshot-wide occurrence
// counts, divided by all keyword occurrences in the snapshot.
double atp(const CorpusSnapshot& snap, PaperIndex paper);
// Mean keyword entropy of (paper + reference) over in-snapshot references.
double reference_relevance(const CorpusSnapshot& snap, PaperIndex paper);
// Mean title+keyword cosine similarity to in-snapshot references.
double title_keyword_similarity(const CorpusSnapshot& snap, PaperIndex paper);

// Sum over the publication-year cohorts of a venue of each cohort's mean
// citation count; the alternative venue score behind VenueScore::Eq4Sum.
double venue_eq4_sum(const CorpusSnapshot& snap, VenueIndex venue);

// --- per-author factors -----------------------------------------------------

// Citations received during `year` by the author's papers from
// [year - delta_t, year - 1], per such paper.
double aif(const CorpusSnapshot& snap, AuthorIndex author, int year, int delta_t);

// exp(mean over snapshot papers of ln(c + 1)).
double citation_baseline(const CorpusSnapshot& snap);
// exp(mean ln(c + 1) over the author's papers) - mu_p. Throws NotFoundError for
// authors without snapshot papers.
double q_value(const CorpusSnapshot& snap, AuthorIndex author, double mu_p);

struct CoauthorStats {
  double hmax_co = 0;
  double have_co = 0;
  double hlo_co = 0;
  double hdif = 0;
  double num_co = 0;
  double div = 0;
};
CoauthorStats coauthor_stats(const CorpusSnapshot& snap, AuthorIndex author,
                             std::span<const std::uint32_t> h_by_author);

struct InstitutionFeatures {
  double h_col = 0;
  double num_pub_col = 0;
  double cits_col = 0;
  double pr_col = 0;
  double g_h = 0;
  double g_cit = 0;
  double g_pub = 0;
  double gdp = 0;
  bool affiliated = false;
  bool gdp_missing = false;
};
InstitutionFeatures institution_features(const SnapshotMetrics& metrics, AuthorIndex author);

struct TemporalFeatures {
  double num_years = 0;
  double hindex_dif = 0;
};
TemporalFeatures temporal_features(const Corpus& corpus, AuthorIndex author, int cutoff_year,
                                   int delta_t);

// --- matrix -----------------------------------------------------------------

struct FeatureWarnings {
  std::size_t unaffiliated_authors = 0;
  std::size_t missing_gdp = 0;
};

struct FeatureMatrix {
  std::vector<std::string> authors;
  DesignMatrix features;
  std::vector<FactorGroup> groups;  // one per column
  std::vector<double> target;       // h-index at target_year
  int cutoff_year = 0;
  int delta_t = 0;
  int target_year = 0;
  FeatureWarnings warnings;

  std::size_t rows() const { return features.rows(); }
  std::vector<std::size_t> group_columns(FactorGroup group) const;
  std::vector<std::size_t> columns_except(FactorGroup group) const;
};

// One row per author with a paper in (cutoff - delta_t, cutoff], sorted by
// author id. `target` is left empty.
FeatureMatrix extract_features(const Corpus& corpus, int cutoff_year, int delta_t,
                               const FeatureConfig& config = {});

// As extract_features, plus h-index targets from the target_year snapshot.
// Requires cutoff_year < target_year <= corpus.max_year().
FeatureMatrix extract_matrix(const Corpus& corpus, int cutoff_year, int delta_t, int target_year,
                             const FeatureConfig& config = {});

// Header "author_id,<feature names>,target", 10 significant digits.
void write_feature_csv(std::ostream& out, const FeatureMatrix& matrix);
FeatureMatrix read_feature_csv(std::istream& in);

}  // namespace scifactor
