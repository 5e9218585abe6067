#include "scifactor/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "scifactor/error.hpp"
#include "scifactor/parallel.hpp"
#include "scifactor/scimetrics.hpp"

namespace scifactor {

namespace {

// Column positions; must follow feature_catalog() order.
enum Column : std::size_t {
  kCits, kNumPub, kAveCi, kHiCi, kLoCi, kAtp, kHiCiRef, kAveCiRef, kLoCiRef, kAveNumRef, kRelRef, kSim,
  kPrV, kAveCiV, kHV,
  kHA, kPrA, kAif, kQ, kHmaxCo, kNumCo, kHaveCo, kHloCo, kHdif, kDiv,
  kHCol, kNumPubCol, kCitsCol, kPrCol, kGH, kGCit, kGPub, kGdp,
  kNumYears, kHindexDif,
  kStandardColumns,
};

std::vector<std::uint32_t> author_h_indexes(const CorpusSnapshot& snap) {
  std::vector<std::uint32_t> h(snap.corpus().author_count(), 0);
  std::vector<std::uint32_t> counts;
  for (const AuthorIndex a : snap.authors()) {
    counts.clear();
    for (const PaperIndex p : snap.author_papers(a)) counts.push_back(snap.citation_count(p));
    h[a] = h_index(counts);
  }
  return h;
}

struct PaperFeatures {
  double atp = 0, hi_ref = 0, ave_ref = 0, lo_ref = 0, num_ref = 0, rel_ref = 0, sim = 0;
};

PaperFeatures paper_features(const CorpusSnapshot& snap, PaperIndex p) {
  PaperFeatures f;
  f.atp = atp(snap, p);
  const auto refs = snap.references(p);
  f.num_ref = static_cast<double>(refs.size());
  if (!refs.empty()) {
    double lo = std::numeric_limits<double>::max(), hi = 0.0, sum = 0.0;
    for (const PaperIndex r : refs) {
      const double c = snap.citation_count(r);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
      sum += c;
    }
    f.hi_ref = hi;
    f.lo_ref = lo;
    f.ave_ref = sum / static_cast<double>(refs.size());
  }
  f.rel_ref = reference_relevance(snap, p);
  f.sim = title_keyword_similarity(snap, p);
  return f;
}

double mean_or_zero(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

}  // namespace

// ---------------------------------------------------------------------------

SnapshotMetrics::SnapshotMetrics(const CorpusSnapshot& snap, const FeatureConfig& config) : snap_(&snap) {
  const auto& corpus = snap.corpus();
  author_h_ = author_h_indexes(snap);
  author_citations_.assign(corpus.author_count(), 0.0);
  author_papers_.assign(corpus.author_count(), 0.0);
  for (const AuthorIndex a : snap.authors()) {
    double cits = 0.0;
    for (const PaperIndex p : snap.author_papers(a)) cits += snap.citation_count(p);
    author_citations_[a] = cits;
    author_papers_[a] = static_cast<double>(snap.author_papers(a).size());
  }

  // Graph nodes are sorted by id and the snapshot lists are in index (= id)
  // order, so node i corresponds to the i-th listed entity.
  author_pagerank_.assign(corpus.author_count(), 0.0);
  const auto coauthor_pr = pagerank(build_coauthor_graph(snap), config.pagerank);
  for (std::size_t i = 0; i < snap.authors().size(); ++i) {
    author_pagerank_[snap.authors()[i]] = coauthor_pr.scores[i];
  }

  venue_pagerank_.assign(corpus.venue_count(), 0.0);
  venue_eq4_.assign(corpus.venue_count(), 0.0);
  venue_mean_citations_.assign(corpus.venue_count(), 0.0);
  venue_h_.assign(corpus.venue_count(), 0);
  const auto venue_pr = pagerank(build_venue_graph(snap), config.pagerank);
  std::vector<std::uint32_t> counts;
  for (std::size_t i = 0; i < snap.venues().size(); ++i) {
    const VenueIndex v = snap.venues()[i];
    venue_pagerank_[v] = venue_pr.scores[i];
    venue_eq4_[v] = scifactor::venue_eq4_sum(snap, v);
    counts.clear();
    double sum = 0.0;
    for (const PaperIndex p : snap.venue_papers(v)) {
      counts.push_back(snap.citation_count(p));
      sum += snap.citation_count(p);
    }
    venue_mean_citations_[v] = mean_or_zero(sum, counts.size());
    venue_h_[v] = h_index(counts);
  }

  if (config.include_pr_pub) {
    paper_pagerank_.assign(corpus.paper_count(), 0.0);
    const auto citation_pr = pagerank(build_citation_graph(snap), config.pagerank);
    for (std::size_t i = 0; i < snap.papers().size(); ++i) {
      paper_pagerank_[snap.papers()[i]] = citation_pr.scores[i];
    }
  }
  mu_p_ = citation_baseline(snap);
}

// ---------------------------------------------------------------------------
// Per-paper factors

double atp(const CorpusSnapshot& snap, PaperIndex paper) {
  const auto total = snap.total_keyword_occurrences();
  const auto terms = snap.corpus().keyword_terms(paper);
  if (total == 0 || terms.empty()) return 0.0;
  std::vector<TermId> distinct(terms.begin(), terms.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::uint64_t sum = 0;
  for (const TermId t : distinct) sum += snap.keyword_occurrences(t);
  return std::min(1.0, static_cast<double>(sum) / static_cast<double>(total));
}

double reference_relevance(const CorpusSnapshot& snap, PaperIndex paper) {
  const auto refs = snap.references(paper);
  if (refs.empty()) return 0.0;
  const auto& corpus = snap.corpus();
  const auto own = corpus.keyword_terms(paper);
  std::vector<TermId> combined;
  double sum = 0.0;
  for (const PaperIndex r : refs) {
    const auto other = corpus.keyword_terms(r);
    combined.assign(own.begin(), own.end());
    combined.insert(combined.end(), other.begin(), other.end());
    sum += token_entropy(combined);
  }
  return sum / static_cast<double>(refs.size());
}

double title_keyword_similarity(const CorpusSnapshot& snap, PaperIndex paper) {
  const auto refs = snap.references(paper);
  if (refs.empty()) return 0.0;
  const auto& corpus = snap.corpus();
  const auto own = TermVector::from_terms(corpus.text_terms(paper));
  double sum = 0.0;
  for (const PaperIndex r : refs) {
    sum += cosine_similarity(own, TermVector::from_terms(corpus.text_terms(r)));
  }
  return sum / static_cast<double>(refs.size());
}

double venue_eq4_sum(const CorpusSnapshot& snap, VenueIndex venue) {
  std::map<int, std::pair<double, std::size_t>> cohorts;
  for (const PaperIndex p : snap.venue_papers(venue)) {
    auto& [sum, n] = cohorts[snap.corpus().paper(p).year];
    sum += snap.citation_count(p);
    ++n;
  }
  double total = 0.0;
  for (const auto& [year, cohort] : cohorts) total += cohort.first / static_cast<double>(cohort.second);
  return total;
}

// ---------------------------------------------------------------------------
// Per-author factors

double aif(const CorpusSnapshot& snap, AuthorIndex author, int year, int delta_t) {
  if (year > snap.cutoff_year()) {
    throw ConfigError("aif year " + std::to_string(year) + " is after the snapshot cutoff " +
                      std::to_string(snap.cutoff_year()));
  }
  const auto& corpus = snap.corpus();
  std::size_t papers = 0;
  std::size_t citations = 0;
  for (const PaperIndex p : snap.author_papers(author)) {
    const int y = corpus.paper(p).year;
    if (y < year - delta_t || y > year - 1) continue;
    ++papers;
    for (const PaperIndex c : snap.citing_papers(p)) {
      if (corpus.paper(c).year == year) ++citations;
    }
  }
  return papers == 0 ? 0.0 : static_cast<double>(citations) / static_cast<double>(papers);
}

double citation_baseline(const CorpusSnapshot& snap) {
  double sum = 0.0;
  for (const PaperIndex p : snap.papers()) sum += std::log(snap.citation_count(p) + 1.0);
  return std::exp(sum / static_cast<double>(snap.papers().size()));
}

double q_value(const CorpusSnapshot& snap, AuthorIndex author, double mu_p) {
  const auto papers = author < snap.corpus().author_count() ? snap.author_papers(author)
                                                            : std::span<const PaperIndex>{};
  if (papers.empty()) throw NotFoundError("author has no papers in the snapshot");
  double sum = 0.0;
  for (const PaperIndex p : papers) sum += std::log(snap.citation_count(p) + 1.0);
  return std::exp(sum / static_cast<double>(papers.size())) - mu_p;
}

CoauthorStats coauthor_stats(const CorpusSnapshot& snap, AuthorIndex author,
                             std::span<const std::uint32_t> h_by_author) {
  const auto& corpus = snap.corpus();
  std::vector<AuthorIndex> coauthors;
  for (const PaperIndex p : snap.author_papers(author)) {
    for (const AuthorIndex c : corpus.paper_authors(p)) {
      if (c != author) coauthors.push_back(c);
    }
  }
  std::sort(coauthors.begin(), coauthors.end());
  coauthors.erase(std::unique(coauthors.begin(), coauthors.end()), coauthors.end());
  CoauthorStats s;
  if (coauthors.empty()) return s;

  double hmax = 0.0, hlo = std::numeric_limits<double>::max(), hsum = 0.0;
  std::vector<std::uint32_t> institution_tokens;
  std::vector<PaperIndex> coauthor_papers;
  for (const AuthorIndex c : coauthors) {
    const double h = h_by_author[c];
    hmax = std::max(hmax, h);
    hlo = std::min(hlo, h);
    hsum += h;
    if (const auto inst = snap.author_institution(c)) institution_tokens.push_back(*inst);
    const auto papers = snap.author_papers(c);
    coauthor_papers.insert(coauthor_papers.end(), papers.begin(), papers.end());
  }
  std::sort(coauthor_papers.begin(), coauthor_papers.end());
  coauthor_papers.erase(std::unique(coauthor_papers.begin(), coauthor_papers.end()), coauthor_papers.end());
  std::vector<TermId> keyword_tokens;
  for (const PaperIndex p : coauthor_papers) {
    const auto kw = corpus.keyword_terms(p);
    keyword_tokens.insert(keyword_tokens.end(), kw.begin(), kw.end());
  }

  s.hmax_co = hmax;
  s.hlo_co = hlo;
  s.have_co = hsum / static_cast<double>(coauthors.size());
  s.hdif = hmax - static_cast<double>(h_by_author[author]);
  s.num_co = static_cast<double>(coauthors.size());
  s.div = token_entropy(institution_tokens) + token_entropy(keyword_tokens);
  return s;
}

InstitutionFeatures institution_features(const SnapshotMetrics& metrics, AuthorIndex author) {
  const auto& snap = metrics.snapshot();
  InstitutionFeatures f;
  const auto inst = snap.author_institution(author);
  if (!inst) return f;
  f.affiliated = true;

  const auto members = snap.institution_authors(*inst);
  std::vector<double> h, cits, pubs;
  double pr_sum = 0.0;
  for (const AuthorIndex m : members) {
    h.push_back(metrics.author_h()[m]);
    cits.push_back(metrics.author_citations()[m]);
    pubs.push_back(metrics.author_papers()[m]);
    if (m != author) pr_sum += metrics.author_pagerank()[m];
  }
  const std::size_t colleagues = members.size() - 1;
  if (colleagues > 0) {
    const double self_h = metrics.author_h()[author];
    auto sum = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); };
    f.h_col = (sum(h) - self_h) / static_cast<double>(colleagues);
    f.num_pub_col = (sum(pubs) - metrics.author_papers()[author]) / static_cast<double>(colleagues);
    f.cits_col = (sum(cits) - metrics.author_citations()[author]) / static_cast<double>(colleagues);
    f.pr_col = pr_sum / static_cast<double>(colleagues);
  }
  f.g_h = gini_coefficient(h);
  f.g_cit = gini_coefficient(cits);
  f.g_pub = gini_coefficient(pubs);

  const auto& country = snap.corpus().institution(*inst).country;
  if (const auto gdp = snap.corpus().gdp().find(country)) {
    f.gdp = *gdp;
  } else {
    f.gdp_missing = true;
  }
  return f;
}

TemporalFeatures temporal_features(const Corpus& corpus, AuthorIndex author, int cutoff_year,
                                   int delta_t) {
  const CorpusSnapshot now(corpus, cutoff_year);
  const auto papers = now.author_papers(author);
  if (papers.empty()) throw NotFoundError("author has no papers dated <= " + std::to_string(cutoff_year));
  int first = cutoff_year;
  std::vector<std::uint32_t> counts;
  for (const PaperIndex p : papers) {
    first = std::min(first, corpus.paper(p).year);
    counts.push_back(now.citation_count(p));
  }
  TemporalFeatures t;
  t.num_years = cutoff_year - first;
  const double h_now = h_index(counts);
  double h_then = 0.0;
  const int earlier = cutoff_year - delta_t;
  if (earlier >= corpus.min_year()) {
    const CorpusSnapshot then(corpus, earlier);
    counts.clear();
    for (const PaperIndex p : then.author_papers(author)) counts.push_back(then.citation_count(p));
    h_then = h_index(counts);
  }
  t.hindex_dif = h_now - h_then;
  return t;
}

// ---------------------------------------------------------------------------
// Matrix

std::vector<std::size_t> FeatureMatrix::group_columns(FactorGroup group) const {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c] == group) cols.push_back(c);
  }
  return cols;
}

std::vector<std::size_t> FeatureMatrix::columns_except(FactorGroup group) const {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c] != group) cols.push_back(c);
  }
  return cols;
}

FeatureMatrix extract_features(const Corpus& corpus, int cutoff_year, int delta_t,
                               const FeatureConfig& config) {
  if (delta_t <= 0) throw ConfigError("delta_t must be positive");
  const CorpusSnapshot snap(corpus, cutoff_year);
  const SnapshotMetrics metrics(snap, config);
  const int window_start = cutoff_year - delta_t;  // exclusive

  std::vector<std::uint32_t> h_then(corpus.author_count(), 0);
  if (window_start >= corpus.min_year()) h_then = author_h_indexes(CorpusSnapshot(corpus, window_start));

  // Per-paper factors for every window paper, computed once.
  std::vector<PaperIndex> window_papers;
  std::vector<std::uint32_t> window_slot(corpus.paper_count(), 0);
  for (const PaperIndex p : snap.papers()) {
    if (corpus.paper(p).year > window_start) {
      window_slot[p] = static_cast<std::uint32_t>(window_papers.size());
      window_papers.push_back(p);
    }
  }
  std::vector<PaperFeatures> per_paper(window_papers.size());
  parallel_for(window_papers.size(), config.threads,
               [&](std::size_t i) { per_paper[i] = paper_features(snap, window_papers[i]); });

  std::vector<AuthorIndex> active;
  for (const AuthorIndex a : snap.authors()) {
    const auto papers = snap.author_papers(a);
    if (std::any_of(papers.begin(), papers.end(),
                    [&](PaperIndex p) { return corpus.paper(p).year > window_start; })) {
      active.push_back(a);
    }
  }
  if (active.empty()) {
    throw DataError("no authors active in (" + std::to_string(window_start) + ", " +
                    std::to_string(cutoff_year) + "]");
  }

  std::vector<std::string> names;
  std::vector<FactorGroup> groups;
  for (const auto& spec : feature_catalog()) {
    names.emplace_back(spec.name);
    groups.push_back(spec.group);
  }
  if (config.include_pr_pub) {
    names.emplace_back(pr_pub_feature().name);
    groups.push_back(pr_pub_feature().group);
  }

  FeatureMatrix m;
  m.features = DesignMatrix(active.size(), std::move(names));
  m.groups = std::move(groups);
  m.cutoff_year = cutoff_year;
  m.delta_t = delta_t;
  std::vector<char> unaffiliated(active.size(), 0), gdp_missing(active.size(), 0);

  const auto& venue_score =
      config.venue_score == VenueScore::PageRank ? metrics.venue_pagerank() : metrics.venue_eq4_sum();

  parallel_for(active.size(), config.threads, [&](std::size_t row) {
    const AuthorIndex a = active[row];
    auto out = m.features.row(row);
    const auto papers = snap.author_papers(a);

    double cits = 0.0, hi = 0.0, lo = std::numeric_limits<double>::max();
    int first_year = cutoff_year;
    PaperFeatures acc;
    double pr_v = 0.0, ave_v = 0.0, h_v = 0.0, pr_pub = 0.0;
    std::size_t in_window = 0;
    for (const PaperIndex p : papers) {
      const double c = snap.citation_count(p);
      cits += c;
      hi = std::max(hi, c);
      lo = std::min(lo, c);
      first_year = std::min(first_year, corpus.paper(p).year);
      if (!metrics.paper_pagerank().empty()) pr_pub += metrics.paper_pagerank()[p];
      if (corpus.paper(p).year <= window_start) continue;
      ++in_window;
      const auto& f = per_paper[window_slot[p]];
      acc.atp += f.atp;
      acc.hi_ref += f.hi_ref;
      acc.ave_ref += f.ave_ref;
      acc.lo_ref += f.lo_ref;
      acc.num_ref += f.num_ref;
      acc.rel_ref += f.rel_ref;
      acc.sim += f.sim;
      const VenueIndex v = corpus.paper_venue(p);
      pr_v += venue_score[v];
      ave_v += metrics.venue_mean_citations()[v];
      h_v += metrics.venue_h()[v];
    }
    const auto n = papers.size();
    out[kCits] = cits;
    out[kNumPub] = static_cast<double>(n);
    out[kAveCi] = cits / static_cast<double>(n);
    out[kHiCi] = hi;
    out[kLoCi] = lo;
    out[kAtp] = mean_or_zero(acc.atp, in_window);
    out[kHiCiRef] = mean_or_zero(acc.hi_ref, in_window);
    out[kAveCiRef] = mean_or_zero(acc.ave_ref, in_window);
    out[kLoCiRef] = mean_or_zero(acc.lo_ref, in_window);
    out[kAveNumRef] = mean_or_zero(acc.num_ref, in_window);
    out[kRelRef] = mean_or_zero(acc.rel_ref, in_window);
    out[kSim] = mean_or_zero(acc.sim, in_window);

    out[kPrV] = mean_or_zero(pr_v, in_window);
    out[kAveCiV] = mean_or_zero(ave_v, in_window);
    out[kHV] = mean_or_zero(h_v, in_window);

    out[kHA] = metrics.author_h()[a];
    out[kPrA] = metrics.author_pagerank()[a];
    out[kAif] = aif(snap, a, cutoff_year, delta_t);
    out[kQ] = q_value(snap, a, metrics.mu_p());
    const auto co = coauthor_stats(snap, a, metrics.author_h());
    out[kHmaxCo] = co.hmax_co;
    out[kNumCo] = co.num_co;
    out[kHaveCo] = co.have_co;
    out[kHloCo] = co.hlo_co;
    out[kHdif] = co.hdif;
    out[kDiv] = co.div;

    const auto inst = institution_features(metrics, a);
    out[kHCol] = inst.h_col;
    out[kNumPubCol] = inst.num_pub_col;
    out[kCitsCol] = inst.cits_col;
    out[kPrCol] = inst.pr_col;
    out[kGH] = inst.g_h;
    out[kGCit] = inst.g_cit;
    out[kGPub] = inst.g_pub;
    out[kGdp] = inst.gdp;
    unaffiliated[row] = !inst.affiliated;
    gdp_missing[row] = inst.affiliated && inst.gdp_missing;

    out[kNumYears] = cutoff_year - first_year;
    out[kHindexDif] = static_cast<double>(metrics.author_h()[a]) - static_cast<double>(h_then[a]);
    if (config.include_pr_pub) out[kStandardColumns] = pr_pub;
  });

  m.authors.reserve(active.size());
  for (const AuthorIndex a : active) m.authors.push_back(corpus.author_id(a));
  m.warnings.unaffiliated_authors = static_cast<std::size_t>(std::count(unaffiliated.begin(), unaffiliated.end(), 1));
  m.warnings.missing_gdp = static_cast<std::size_t>(std::count(gdp_missing.begin(), gdp_missing.end(), 1));
  m.features.require_finite();
  return m;
}

FeatureMatrix extract_matrix(const Corpus& corpus, int cutoff_year, int delta_t, int target_year,
                             const FeatureConfig& config) {
  if (cutoff_year >= target_year) {
    throw ConfigError("cutoff year " + std::to_string(cutoff_year) + " must be before target year " +
                      std::to_string(target_year));
  }
  if (target_year > corpus.max_year()) {
    throw ConfigError("target year " + std::to_string(target_year) + " is after the last corpus year " +
                      std::to_string(corpus.max_year()));
  }
  FeatureMatrix m = extract_features(corpus, cutoff_year, delta_t, config);
  const CorpusSnapshot future(corpus, target_year);
  const auto h = author_h_indexes(future);
  m.target_year = target_year;
  m.target.reserve(m.rows());
  for (const auto& id : m.authors) m.target.push_back(h[*corpus.find_author(id)]);
  return m;
}

// ---------------------------------------------------------------------------
// CSV

void write_feature_csv(std::ostream& out, const FeatureMatrix& matrix) {
  out << "author_id";
  for (const auto& name : matrix.features.names()) out << ',' << name;
  out << ",target\n";
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << csv_escape(matrix.authors[r]);
    for (const double v : matrix.features.row(r)) out << ',' << format_real(v, 10);
    out << ',';
    if (!matrix.target.empty()) out << format_real(matrix.target[r], 10);
    out << '\n';
  }
}

FeatureMatrix read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("feature CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header.front() != "author_id" || header.back() != "target") {
    throw DataError("feature CSV header must be 'author_id,<features>,target'");
  }
  std::vector<std::string> names(header.begin() + 1, header.end() - 1);
  FeatureMatrix m;
  for (const auto& name : names) {
    const auto g = feature_group(name);
    if (!g) throw DataError("unknown feature column '" + name + "'");
    m.groups.push_back(*g);
  }
  auto parse = [](const std::string& cell, std::size_t line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw DataError("feature CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
    }
    return v;
  };
  std::vector<double> values;
  std::size_t line_no = 1, missing_targets = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("feature CSV line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields");
    }
    m.authors.push_back(cells.front());
    for (std::size_t c = 1; c + 1 < cells.size(); ++c) values.push_back(parse(cells[c], line_no));
    if (cells.back().empty()) {
      ++missing_targets;
    } else {
      m.target.push_back(parse(cells.back(), line_no));
    }
  }
  if (missing_targets != 0 && !m.target.empty()) throw DataError("feature CSV has partially missing targets");
  m.features = DesignMatrix(m.authors.size(), std::move(names), std::move(values));
  return m;
}

}  // namespace scifactor
