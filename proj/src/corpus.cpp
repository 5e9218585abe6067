#include "scifactor/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "scifactor/error.hpp"

namespace scifactor {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxMessages = 20;

void note(LoadReport& report, std::string message) {
  if (report.messages.size() < kMaxMessages) report.messages.push_back(std::move(message));
}

std::vector<std::string> normalize_keywords(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& k : raw) {
    for (auto& t : tokenize(k)) out.push_back(std::move(t));
  }
  return out;
}

std::string line_error(std::string_view file, std::size_t line, std::string_view what) {
  return std::string(file) + " line " + std::to_string(line) + ": " + std::string(what);
}

std::string require_string(const json& obj, const char* key, std::string_view file,
                           std::size_t line, bool required = true) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw DataError(line_error(file, line, std::string("missing \"") + key + "\""));
    return {};
  }
  if (!it->is_string()) throw DataError(line_error(file, line, std::string("\"") + key + "\" must be a string"));
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key, std::string_view file,
                                     std::size_t line) {
  std::vector<std::string> out;
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw DataError(line_error(file, line, std::string("\"") + key + "\" must be an array"));
  for (const auto& v : *it) {
    if (!v.is_string()) throw DataError(line_error(file, line, std::string("\"") + key + "\" entries must be strings"));
    out.push_back(v.get<std::string>());
  }
  return out;
}

template <typename Fn>
void for_each_json_line(std::istream& in, std::string_view file, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DataError(line_error(file, line, std::string("malformed JSON: ") + e.what()));
    }
    if (!obj.is_object()) throw DataError(line_error(file, line, "expected a JSON object"));
    fn(obj, line);
  }
}

}  // namespace

void GdpTable::set(const std::string& country, double gdp) {
  if (!std::isfinite(gdp) || gdp <= 0.0) {
    throw DataError("GDP for '" + country + "' must be a positive number");
  }
  values_[country] = gdp;
}

std::optional<double> GdpTable::find(const std::string& country) const {
  if (const auto it = values_.find(country); it != values_.end()) return it->second;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parsing

std::vector<PaperRecord> parse_papers_jsonl(std::istream& in) {
  std::vector<PaperRecord> papers;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_json_line(in, "papers", [&](const json& obj, std::size_t line) {
    PaperRecord p;
    p.id = require_string(obj, "id", "papers", line);
    if (p.id.empty()) throw DataError(line_error("papers", line, "empty paper id"));
    p.title = require_string(obj, "title", "papers", line, false);
    const auto year = obj.find("year");
    if (year == obj.end() || !year->is_number_integer()) {
      throw DataError(line_error("papers", line, "\"year\" must be an integer"));
    }
    p.year = year->get<int>();
    p.venue = require_string(obj, "venue", "papers", line, false);
    p.keywords = normalize_keywords(string_list(obj, "keywords", "papers", line));
    p.references = string_list(obj, "references", "papers", line);
    const auto authors = obj.find("authors");
    if (authors == obj.end() || !authors->is_array() || authors->empty()) {
      throw DataError(line_error("papers", line, "\"authors\" must be a non-empty array"));
    }
    for (const auto& a : *authors) {
      if (!a.is_object()) throw DataError(line_error("papers", line, "author entries must be objects"));
      Authorship s;
      s.author_id = require_string(a, "id", "papers", line);
      if (s.author_id.empty()) throw DataError(line_error("papers", line, "empty author id"));
      s.author_name = require_string(a, "name", "papers", line, false);
      s.institution_id = require_string(a, "institution", "papers", line, false);
      p.authorships.push_back(std::move(s));
    }
    if (const auto [it, inserted] = seen.emplace(p.id, line); !inserted) {
      throw DataError(line_error("papers", line, "duplicate paper id '" + p.id + "' (first seen on line " +
                                                     std::to_string(it->second) + ")"));
    }
    papers.push_back(std::move(p));
  });
  return papers;
}

std::vector<InstitutionRecord> parse_institutions_jsonl(std::istream& in) {
  std::vector<InstitutionRecord> out;
  std::set<std::string> seen;
  for_each_json_line(in, "institutions", [&](const json& obj, std::size_t line) {
    InstitutionRecord r;
    r.id = require_string(obj, "id", "institutions", line);
    if (r.id.empty()) throw DataError(line_error("institutions", line, "empty institution id"));
    r.name = require_string(obj, "name", "institutions", line, false);
    r.country = require_string(obj, "country", "institutions", line, false);
    if (!seen.insert(r.id).second) {
      throw DataError(line_error("institutions", line, "duplicate institution id '" + r.id + "'"));
    }
    out.push_back(std::move(r));
  });
  return out;
}

GdpTable parse_gdp_csv(std::istream& in) {
  GdpTable table;
  std::string text;
  std::size_t line = 0;
  bool header = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    if (!header) {
      if (text != "country,gdp") throw DataError(line_error("gdp", line, "expected header 'country,gdp'"));
      header = true;
      continue;
    }
    const auto fields = split_csv_line(text);
    if (fields.size() != 2) throw DataError(line_error("gdp", line, "expected 'country,gdp'"));
    const std::string& country = fields[0];
    const std::string& value = fields[1];
    double gdp = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), gdp);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw DataError(line_error("gdp", line, "unparseable GDP value '" + value + "'"));
    }
    if (table.find(country)) throw DataError(line_error("gdp", line, "duplicate country '" + country + "'"));
    try {
      table.set(country, gdp);
    } catch (const DataError& e) {
      throw DataError(line_error("gdp", line, e.what()));
    }
  }
  if (!header) throw DataError("gdp: missing header 'country,gdp'");
  return table;
}

// ---------------------------------------------------------------------------
// Corpus

struct Corpus::Data {
  std::vector<PaperRecord> papers;
  std::unordered_map<std::string, PaperIndex> paper_lookup;
  IndexLists references;
  IndexLists paper_authors;
  IndexLists paper_affiliations;
  std::vector<VenueIndex> paper_venue;
  IndexLists keyword_terms;
  IndexLists text_terms;

  std::vector<std::string> author_ids;
  std::vector<std::string> author_names;
  std::unordered_map<std::string, AuthorIndex> author_lookup;

  std::vector<std::string> venue_ids;
  std::vector<bool> venue_unresolved;

  std::vector<InstitutionRecord> institutions;
  std::unordered_map<std::string, InstitutionIndex> institution_lookup;

  GdpTable gdp;
  Vocabulary vocabulary;
  int min_year = 0;
  int max_year = 0;
  LoadReport report;
};

Corpus Corpus::from_records(std::vector<PaperRecord> papers,
                            std::vector<InstitutionRecord> institutions, GdpTable gdp,
                            const LoadOptions& options) {
  auto data = std::make_shared<Data>();
  LoadReport& report = data->report;

  std::sort(papers.begin(), papers.end(),
            [](const PaperRecord& a, const PaperRecord& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < papers.size(); ++i) {
    if (papers[i].id == papers[i - 1].id) throw DataError("duplicate paper id '" + papers[i].id + "'");
  }
  for (auto& p : papers) {
    if (p.authorships.empty()) throw DataError("paper '" + p.id + "' has no authors");
    if (p.year < options.min_year || p.year > options.max_year) {
      throw DataError("paper '" + p.id + "' year " + std::to_string(p.year) + " outside [" +
                      std::to_string(options.min_year) + ", " + std::to_string(options.max_year) + "]");
    }
  }
  for (PaperIndex i = 0; i < papers.size(); ++i) data->paper_lookup.emplace(papers[i].id, i);

  // Institutions: registry entries first, then stubs for unknown ids.
  std::set<std::string> inst_ids;
  for (const auto& r : institutions) {
    if (!inst_ids.insert(r.id).second) throw DataError("duplicate institution id '" + r.id + "'");
  }
  std::set<std::string> stub_ids;
  for (const auto& p : papers) {
    for (const auto& s : p.authorships) {
      if (!s.institution_id.empty() && !inst_ids.count(s.institution_id) &&
          stub_ids.insert(s.institution_id).second) {
        ++report.unresolved_institutions;
        note(report, "unresolved institution '" + s.institution_id + "'");
      }
    }
  }
  for (const auto& id : stub_ids) institutions.push_back({id, "", "", true});
  std::sort(institutions.begin(), institutions.end(),
            [](const InstitutionRecord& a, const InstitutionRecord& b) { return a.id < b.id; });
  for (InstitutionIndex i = 0; i < institutions.size(); ++i) {
    data->institution_lookup.emplace(institutions[i].id, i);
  }
  data->institutions = std::move(institutions);

  // Authors and venues, in id order.
  std::map<std::string, std::string> author_names;
  std::set<std::string> venue_ids;
  for (const auto& p : papers) {
    for (const auto& s : p.authorships) author_names.emplace(s.author_id, s.author_name);
    venue_ids.insert(p.venue);
  }
  for (const auto& [id, name] : author_names) {
    data->author_lookup.emplace(id, static_cast<AuthorIndex>(data->author_ids.size()));
    data->author_ids.push_back(id);
    data->author_names.push_back(name);
  }
  std::unordered_map<std::string, VenueIndex> venue_lookup;
  for (const auto& v : venue_ids) {
    venue_lookup.emplace(v, static_cast<VenueIndex>(data->venue_ids.size()));
    data->venue_ids.push_back(v);
    data->venue_unresolved.push_back(v.empty());
  }

  std::vector<std::vector<std::uint32_t>> refs(papers.size()), authors(papers.size()),
      affils(papers.size()), keywords(papers.size()), text(papers.size());
  data->paper_venue.resize(papers.size());
  data->min_year = papers.empty() ? 0 : papers.front().year;
  data->max_year = data->min_year;
  for (PaperIndex i = 0; i < papers.size(); ++i) {
    auto& p = papers[i];
    data->min_year = std::min(data->min_year, p.year);
    data->max_year = std::max(data->max_year, p.year);
    if (p.venue.empty()) {
      ++report.unresolved_venues;
      note(report, "paper '" + p.id + "' has no venue");
    }
    data->paper_venue[i] = venue_lookup.at(p.venue);

    std::vector<Authorship> unique_authorships;
    std::set<std::string> seen_authors;
    for (auto& s : p.authorships) {
      if (!seen_authors.insert(s.author_id).second) {
        ++report.duplicate_authorships;
        note(report, "paper '" + p.id + "' lists author '" + s.author_id + "' twice");
        continue;
      }
      authors[i].push_back(data->author_lookup.at(s.author_id));
      affils[i].push_back(s.institution_id.empty() ? kNoInstitution
                                                   : data->institution_lookup.at(s.institution_id));
      unique_authorships.push_back(std::move(s));
    }
    p.authorships = std::move(unique_authorships);

    std::vector<std::string> kept;
    std::set<std::string> seen_refs;
    for (auto& r : p.references) {
      if (r == p.id) {
        ++report.self_references;
        note(report, "paper '" + p.id + "' cites itself");
        continue;
      }
      const auto it = data->paper_lookup.find(r);
      if (it == data->paper_lookup.end()) {
        ++report.dangling_references;
        note(report, "paper '" + p.id + "' cites unknown paper '" + r + "'");
        continue;
      }
      if (!seen_refs.insert(r).second) {
        ++report.duplicate_references;
        continue;
      }
      refs[i].push_back(it->second);
      kept.push_back(std::move(r));
    }
    p.references = std::move(kept);
    std::sort(refs[i].begin(), refs[i].end());

    for (const auto& t : tokenize(p.title)) text[i].push_back(data->vocabulary.intern(t));
    for (const auto& k : p.keywords) {
      const TermId id = data->vocabulary.intern(k);
      keywords[i].push_back(id);
      text[i].push_back(id);
    }
  }
  data->references = IndexLists(refs);
  data->paper_authors = IndexLists(authors);
  data->paper_affiliations = IndexLists(affils);
  data->keyword_terms = IndexLists(keywords);
  data->text_terms = IndexLists(text);
  data->papers = std::move(papers);
  data->gdp = std::move(gdp);
  return Corpus(std::move(data));
}

std::size_t Corpus::paper_count() const { return data_->papers.size(); }
const PaperRecord& Corpus::paper(PaperIndex p) const { return data_->papers.at(p); }
std::optional<PaperIndex> Corpus::find_paper(std::string_view id) const {
  if (const auto it = data_->paper_lookup.find(std::string(id)); it != data_->paper_lookup.end()) {
    return it->second;
  }
  return std::nullopt;
}
std::span<const PaperIndex> Corpus::references(PaperIndex p) const { return data_->references[p]; }
std::span<const AuthorIndex> Corpus::paper_authors(PaperIndex p) const { return data_->paper_authors[p]; }
std::span<const InstitutionIndex> Corpus::paper_affiliations(PaperIndex p) const {
  return data_->paper_affiliations[p];
}
VenueIndex Corpus::paper_venue(PaperIndex p) const { return data_->paper_venue.at(p); }
std::span<const TermId> Corpus::keyword_terms(PaperIndex p) const { return data_->keyword_terms[p]; }
std::span<const TermId> Corpus::text_terms(PaperIndex p) const { return data_->text_terms[p]; }
std::size_t Corpus::citation_edge_count() const { return data_->references.total(); }

std::size_t Corpus::author_count() const { return data_->author_ids.size(); }
const std::string& Corpus::author_id(AuthorIndex a) const { return data_->author_ids.at(a); }
const std::string& Corpus::author_name(AuthorIndex a) const { return data_->author_names.at(a); }
std::optional<AuthorIndex> Corpus::find_author(std::string_view id) const {
  if (const auto it = data_->author_lookup.find(std::string(id)); it != data_->author_lookup.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::size_t Corpus::venue_count() const { return data_->venue_ids.size(); }
const std::string& Corpus::venue_id(VenueIndex v) const { return data_->venue_ids.at(v); }
bool Corpus::venue_unresolved(VenueIndex v) const { return data_->venue_unresolved.at(v); }

std::size_t Corpus::institution_count() const { return data_->institutions.size(); }
const InstitutionRecord& Corpus::institution(InstitutionIndex i) const {
  return data_->institutions.at(i);
}
std::optional<InstitutionIndex> Corpus::find_institution(std::string_view id) const {
  if (const auto it = data_->institution_lookup.find(std::string(id));
      it != data_->institution_lookup.end()) {
    return it->second;
  }
  return std::nullopt;
}

const GdpTable& Corpus::gdp() const { return data_->gdp; }
const Vocabulary& Corpus::vocabulary() const { return data_->vocabulary; }
int Corpus::min_year() const { return data_->min_year; }
int Corpus::max_year() const { return data_->max_year; }
const LoadReport& Corpus::load_report() const { return data_->report; }

Corpus parse_corpus(std::istream& papers, std::istream& institutions, std::istream* gdp,
                    const LoadOptions& options) {
  auto paper_records = parse_papers_jsonl(papers);
  auto inst_records = parse_institutions_jsonl(institutions);
  GdpTable table = gdp ? parse_gdp_csv(*gdp) : GdpTable{};
  return Corpus::from_records(std::move(paper_records), std::move(inst_records), std::move(table),
                              options);
}

Corpus load_corpus(const std::filesystem::path& papers_path,
                   const std::filesystem::path& institutions_path,
                   const std::optional<std::filesystem::path>& gdp_path,
                   const LoadOptions& options) {
  auto open = [](const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
  };
  auto papers = open(papers_path);
  auto institutions = open(institutions_path);
  if (gdp_path) {
    auto gdp = open(*gdp_path);
    return parse_corpus(papers, institutions, &gdp, options);
  }
  return parse_corpus(papers, institutions, nullptr, options);
}

// ---------------------------------------------------------------------------
// Serialization

void write_papers_jsonl(std::ostream& out, std::span<const PaperRecord> papers) {
  for (const auto& p : papers) {
    nlohmann::ordered_json obj;
    obj["id"] = p.id;
    obj["title"] = p.title;
    obj["year"] = p.year;
    obj["venue"] = p.venue;
    obj["keywords"] = p.keywords;
    auto authors = nlohmann::ordered_json::array();
    for (const auto& s : p.authorships) {
      nlohmann::ordered_json a;
      a["id"] = s.author_id;
      a["name"] = s.author_name;
      a["institution"] = s.institution_id;
      authors.push_back(std::move(a));
    }
    obj["authors"] = std::move(authors);
    obj["references"] = p.references;
    out << obj.dump() << '\n';
  }
}

void write_institutions_jsonl(std::ostream& out, std::span<const InstitutionRecord> institutions) {
  for (const auto& r : institutions) {
    nlohmann::ordered_json obj;
    obj["id"] = r.id;
    obj["name"] = r.name;
    obj["country"] = r.country;
    out << obj.dump() << '\n';
  }
}

void write_gdp_csv(std::ostream& out, const GdpTable& gdp) {
  out << "country,gdp\n";
  for (const auto& [country, value] : gdp.entries()) {
    out << csv_escape(country) << ',' << format_real(value, 17) << '\n';
  }
}

void write_corpus(const Corpus& corpus, std::ostream& papers, std::ostream& institutions,
                  std::ostream& gdp) {
  std::vector<PaperRecord> records;
  records.reserve(corpus.paper_count());
  for (PaperIndex p = 0; p < corpus.paper_count(); ++p) records.push_back(corpus.paper(p));
  write_papers_jsonl(papers, records);
  std::vector<InstitutionRecord> resolved;
  for (InstitutionIndex i = 0; i < corpus.institution_count(); ++i) {
    if (!corpus.institution(i).unresolved) resolved.push_back(corpus.institution(i));
  }
  write_institutions_jsonl(institutions, resolved);
  write_gdp_csv(gdp, corpus.gdp());
}

// ---------------------------------------------------------------------------
// Snapshot

IndexLists::IndexLists(const std::vector<std::vector<std::uint32_t>>& rows) {
  offsets_.reserve(rows.size() + 1);
  offsets_.push_back(0);
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  values_.reserve(total);
  for (const auto& r : rows) {
    values_.insert(values_.end(), r.begin(), r.end());
    offsets_.push_back(static_cast<std::uint32_t>(values_.size()));
  }
}

CorpusSnapshot::CorpusSnapshot(Corpus corpus, int cutoff_year)
    : corpus_(std::move(corpus)), cutoff_year_(cutoff_year) {
  const auto n = corpus_.paper_count();
  in_snapshot_.assign(n, false);
  for (PaperIndex p = 0; p < n; ++p) {
    if (corpus_.paper(p).year <= cutoff_year_) {
      in_snapshot_[p] = true;
      papers_.push_back(p);
    }
  }
  if (papers_.empty()) {
    throw DataError("empty snapshot: no papers dated <= " + std::to_string(cutoff_year_) +
                    " (corpus starts in " + std::to_string(corpus_.min_year()) + ")");
  }

  citation_counts_.assign(n, 0);
  std::vector<std::vector<std::uint32_t>> citing(n), refs(n);
  std::vector<std::vector<std::uint32_t>> author_papers(corpus_.author_count());
  std::vector<std::vector<std::uint32_t>> venue_papers(corpus_.venue_count());
  keyword_counts_.assign(corpus_.vocabulary().size(), 0);
  for (const PaperIndex p : papers_) {
    for (const PaperIndex r : corpus_.references(p)) {
      if (!in_snapshot_[r]) continue;
      refs[p].push_back(r);
      citing[r].push_back(p);
      ++citation_counts_[r];
    }
    for (const AuthorIndex a : corpus_.paper_authors(p)) author_papers[a].push_back(p);
    venue_papers[corpus_.paper_venue(p)].push_back(p);
    for (const TermId t : corpus_.keyword_terms(p)) {
      ++keyword_counts_[t];
      ++total_keywords_;
    }
  }

  author_institution_.assign(corpus_.author_count(), kNoInstitution);
  std::vector<int> affiliation_year(corpus_.author_count(), std::numeric_limits<int>::min());
  for (AuthorIndex a = 0; a < corpus_.author_count(); ++a) {
    if (!author_papers[a].empty()) authors_.push_back(a);
  }
  // Papers are visited in id order, so a strictly-greater year test keeps the
  // smallest id among equally recent papers.
  for (const PaperIndex p : papers_) {
    const auto as = corpus_.paper_authors(p);
    const auto inst = corpus_.paper_affiliations(p);
    const int year = corpus_.paper(p).year;
    for (std::size_t k = 0; k < as.size(); ++k) {
      if (inst[k] == kNoInstitution) continue;
      if (year > affiliation_year[as[k]]) {
        affiliation_year[as[k]] = year;
        author_institution_[as[k]] = inst[k];
      }
    }
  }
  std::vector<std::vector<std::uint32_t>> inst_authors(corpus_.institution_count());
  for (const AuthorIndex a : authors_) {
    if (author_institution_[a] != kNoInstitution) inst_authors[author_institution_[a]].push_back(a);
  }
  for (InstitutionIndex i = 0; i < inst_authors.size(); ++i) {
    if (!inst_authors[i].empty()) institutions_.push_back(i);
  }
  for (VenueIndex v = 0; v < venue_papers.size(); ++v) {
    if (!venue_papers[v].empty()) venues_.push_back(v);
  }

  citing_ = IndexLists(citing);
  references_ = IndexLists(refs);
  author_papers_ = IndexLists(author_papers);
  venue_papers_ = IndexLists(venue_papers);
  institution_authors_ = IndexLists(inst_authors);
}

std::uint32_t CorpusSnapshot::citation_count(std::string_view paper_id) const {
  const auto p = corpus_.find_paper(paper_id);
  if (!p || !in_snapshot_[*p]) {
    throw NotFoundError("paper '" + std::string(paper_id) + "' is not in the " +
                        std::to_string(cutoff_year_) + " snapshot");
  }
  return citation_counts_[*p];
}

std::optional<InstitutionIndex> CorpusSnapshot::author_institution(AuthorIndex a) const {
  const auto i = author_institution_.at(a);
  if (i == kNoInstitution) return std::nullopt;
  return i;
}

CorpusSnapshot snapshot(const Corpus& corpus, int cutoff_year) {
  return CorpusSnapshot(corpus, cutoff_year);
}

}  // namespace scifactor
