#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scifactor/text.hpp"

namespace scifactor {

using PaperIndex = std::uint32_t;
using AuthorIndex = std::uint32_t;
using VenueIndex = std::uint32_t;
using InstitutionIndex = std::uint32_t;
inline constexpr InstitutionIndex kNoInstitution = std::numeric_limits<InstitutionIndex>::max();

struct Authorship {
  std::string author_id;
  std::string author_name;
  std::string institution_id;  // empty when the authorship carries no affiliation
};

struct PaperRecord {
  std::string id;
  std::string title;
  int year = 0;
  std::string venue;
  std::vector<std::string> keywords;  // normalized tokens
  std::vector<Authorship> authorships;
  std::vector<std::string> references;  // resolvable ids only once inside a Corpus
};

struct InstitutionRecord {
  std::string id;
  std::string name;
  std::string country;
  bool unresolved = false;  // referenced by an authorship but absent from the institution file
};

class GdpTable {
 public:
  void set(const std::string& country, double gdp);
  std::optional<double> find(const std::string& country) const;
  const std::map<std::string, double>& entries() const { return values_; }
  bool empty() const { return values_.empty(); }

 private:
  std::map<std::string, double> values_;
};

struct LoadOptions {
  int min_year = 1800;
  int max_year = 2100;
};

struct LoadReport {
  std::size_t dangling_references = 0;
  std::size_t self_references = 0;
  std::size_t duplicate_references = 0;
  std::size_t duplicate_authorships = 0;
  std::size_t unresolved_institutions = 0;
  std::size_t unresolved_venues = 0;
  std::vector<std::string> messages;  // first few warnings, for logs

  std::size_t warning_count() const {
    return dangling_references + self_references + duplicate_references + duplicate_authorships +
           unresolved_institutions + unresolved_venues;
  }
};

// Immutable, fully indexed scholarly corpus. Copies share the same data.
// Papers, authors, venues and institutions are indexed in lexicographic id
// order, so index order is a deterministic iteration order.
class Corpus {
 public:
  static Corpus from_records(std::vector<PaperRecord> papers,
                             std::vector<InstitutionRecord> institutions, GdpTable gdp,
                             const LoadOptions& options = {});

  std::size_t paper_count() const;
  const PaperRecord& paper(PaperIndex p) const;
  std::optional<PaperIndex> find_paper(std::string_view id) const;
  std::span<const PaperIndex> references(PaperIndex p) const;
  std::span<const AuthorIndex> paper_authors(PaperIndex p) const;
  // Parallel to paper_authors; kNoInstitution where the authorship has none.
  std::span<const InstitutionIndex> paper_affiliations(PaperIndex p) const;
  VenueIndex paper_venue(PaperIndex p) const;
  std::span<const TermId> keyword_terms(PaperIndex p) const;
  // Title tokens followed by keyword tokens.
  std::span<const TermId> text_terms(PaperIndex p) const;
  std::size_t citation_edge_count() const;

  std::size_t author_count() const;
  const std::string& author_id(AuthorIndex a) const;
  const std::string& author_name(AuthorIndex a) const;
  std::optional<AuthorIndex> find_author(std::string_view id) const;

  std::size_t venue_count() const;
  const std::string& venue_id(VenueIndex v) const;
  bool venue_unresolved(VenueIndex v) const;

  std::size_t institution_count() const;
  const InstitutionRecord& institution(InstitutionIndex i) const;
  std::optional<InstitutionIndex> find_institution(std::string_view id) const;

  const GdpTable& gdp() const;
  const Vocabulary& vocabulary() const;
  int min_year() const;
  int max_year() const;
  const LoadReport& load_report() const;

 private:
  struct Data;
  explicit Corpus(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  std::shared_ptr<const Data> data_;
};

// Reads papers.jsonl, institutions.jsonl and (optionally) gdp.csv.
Corpus load_corpus(const std::filesystem::path& papers_path,
                   const std::filesystem::path& institutions_path,
                   const std::optional<std::filesystem::path>& gdp_path,
                   const LoadOptions& options = {});

Corpus parse_corpus(std::istream& papers, std::istream& institutions, std::istream* gdp,
                    const LoadOptions& options = {});

std::vector<PaperRecord> parse_papers_jsonl(std::istream& in);
std::vector<InstitutionRecord> parse_institutions_jsonl(std::istream& in);
GdpTable parse_gdp_csv(std::istream& in);

void write_papers_jsonl(std::ostream& out, std::span<const PaperRecord> papers);
void write_institutions_jsonl(std::ostream& out, std::span<const InstitutionRecord> institutions);
void write_gdp_csv(std::ostream& out, const GdpTable& gdp);
// Writes the corpus' papers, resolved institutions and GDP table.
void write_corpus(const Corpus& corpus, std::ostream& papers, std::ostream& institutions,
                  std::ostream& gdp);

// Compressed row storage for the snapshot's derived indexes.
class IndexLists {
 public:
  IndexLists() = default;
  explicit IndexLists(const std::vector<std::vector<std::uint32_t>>& rows);
  std::span<const std::uint32_t> operator[](std::size_t row) const {
    return {values_.data() + offsets_[row], values_.data() + offsets_[row + 1]};
  }
  std::size_t rows() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t total() const { return values_.size(); }

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> values_;
};

// Immutable view of the corpus restricted to papers (and citations from
// papers) dated <= cutoff_year.
class CorpusSnapshot {
 public:
  CorpusSnapshot(Corpus corpus, int cutoff_year);

  const Corpus& corpus() const { return corpus_; }
  int cutoff_year() const { return cutoff_year_; }

  std::span<const PaperIndex> papers() const { return papers_; }
  bool contains(PaperIndex p) const { return in_snapshot_[p]; }
  std::uint32_t citation_count(PaperIndex p) const { return citation_counts_[p]; }
  // Throws NotFoundError for ids outside the snapshot.
  std::uint32_t citation_count(std::string_view paper_id) const;
  std::span<const std::uint32_t> citation_counts() const { return citation_counts_; }
  std::span<const PaperIndex> citing_papers(PaperIndex p) const { return citing_[p]; }
  std::span<const PaperIndex> references(PaperIndex p) const { return references_[p]; }
  std::size_t citation_edge_count() const { return references_.total(); }

  // Authors with at least one snapshot paper.
  std::span<const AuthorIndex> authors() const { return authors_; }
  std::span<const PaperIndex> author_papers(AuthorIndex a) const { return author_papers_[a]; }
  // Institution on the author's most recent affiliated paper (ties: smallest
  // paper id).
  std::optional<InstitutionIndex> author_institution(AuthorIndex a) const;

  std::span<const VenueIndex> venues() const { return venues_; }
  std::span<const PaperIndex> venue_papers(VenueIndex v) const { return venue_papers_[v]; }

  std::span<const InstitutionIndex> institutions() const { return institutions_; }
  std::span<const AuthorIndex> institution_authors(InstitutionIndex i) const {
    return institution_authors_[i];
  }

  std::uint32_t keyword_occurrences(TermId term) const {
    return term < keyword_counts_.size() ? keyword_counts_[term] : 0U;
  }
  std::uint64_t total_keyword_occurrences() const { return total_keywords_; }

 private:
  Corpus corpus_;
  int cutoff_year_;
  std::vector<PaperIndex> papers_;
  std::vector<bool> in_snapshot_;
  std::vector<std::uint32_t> citation_counts_;
  IndexLists citing_;
  IndexLists references_;
  std::vector<AuthorIndex> authors_;
  IndexLists author_papers_;
  std::vector<InstitutionIndex> author_institution_;
  std::vector<VenueIndex> venues_;
  IndexLists venue_papers_;
  std::vector<InstitutionIndex> institutions_;
  IndexLists institution_authors_;
  std::vector<std::uint32_t> keyword_counts_;
  std::uint64_t total_keywords_ = 0;
};

// Throws DataError when no paper is dated <= cutoff_year.
CorpusSnapshot snapshot(const Corpus& corpus, int cutoff_year);

}  // namespace scifactor
