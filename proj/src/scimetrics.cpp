#include "scifactor/scimetrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scifactor/error.hpp"

namespace scifactor {

std::uint32_t h_index(std::span<const std::uint32_t> citation_counts) {
  std::vector<std::uint32_t> sorted(citation_counts.begin(), citation_counts.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::uint32_t h = 0;
  while (h < sorted.size() && sorted[h] >= h + 1) ++h;
  return h;
}

double shannon_entropy(std::span<const double> counts) {
  if (counts.empty()) throw DomainError("shannon_entropy: no counts");
  double total = 0.0;
  for (const double c : counts) {
    if (!std::isfinite(c) || c < 0.0) throw DomainError("shannon_entropy: counts must be finite and >= 0");
    total += c;
  }
  if (total <= 0.0) throw DomainError("shannon_entropy: all counts are zero");
  double h = 0.0;
  for (const double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return std::max(0.0, h);
}

double token_entropy(std::span<const TermId> tokens) {
  if (tokens.empty()) return 0.0;
  std::vector<TermId> sorted(tokens.begin(), tokens.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> counts;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    counts.push_back(static_cast<double>(j - i));
    i = j;
  }
  return shannon_entropy(counts);
}

TermVector TermVector::from_terms(std::span<const TermId> terms) {
  std::vector<TermId> sorted(terms.begin(), terms.end());
  std::sort(sorted.begin(), sorted.end());
  TermVector v;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    v.entries_.emplace_back(sorted[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return v;
}

void TermVector::add(TermId term, std::uint32_t count) {
  if (count == 0) return;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), term,
                             [](const auto& e, TermId t) { return e.first < t; });
  if (it != entries_.end() && it->first == term) {
    it->second += count;
  } else {
    entries_.insert(it, {term, count});
  }
}

std::uint32_t TermVector::count(TermId term) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), term,
                             [](const auto& e, TermId t) { return e.first < t; });
  return it != entries_.end() && it->first == term ? it->second : 0U;
}

TermVector TermVector::scaled(std::uint32_t factor) const {
  TermVector v;
  if (factor == 0) return v;
  v.entries_ = entries_;
  for (auto& e : v.entries_) e.second *= factor;
  return v;
}

double cosine_similarity(const TermVector& a, const TermVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0;
  auto ia = a.entries().begin();
  auto ib = b.entries().begin();
  while (ia != a.entries().end() && ib != b.entries().end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += static_cast<double>(ia->second) * ib->second;
      ++ia;
      ++ib;
    }
  }
  auto norm = [](const TermVector& v) {
    double s = 0.0;
    for (const auto& [term, c] : v.entries()) s += static_cast<double>(c) * c;
    return std::sqrt(s);
  };
  const double sim = dot / (norm(a) * norm(b));
  return std::clamp(sim, 0.0, 1.0);
}

double gini_coefficient(std::span<const double> group_values) {
  if (group_values.empty()) throw DomainError("gini_coefficient: no groups");
  std::vector<double> sorted(group_values.begin(), group_values.end());
  for (const double v : sorted) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("gini_coefficient: values must be finite and >= 0");
  }
  std::sort(sorted.begin(), sorted.end());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (total == 0.0) return 0.0;
  const auto n = sorted.size();
  // Sum of the first n-1 cumulative shares, accumulated as raw partial sums and
  // divided once.
  double running = 0.0;
  double cumulative_sum = 0.0;
  for (std::size_t m = 0; m + 1 < n; ++m) {
    running += sorted[m];
    cumulative_sum += running;
  }
  const double g = 1.0 - (2.0 * (cumulative_sum / total) + 1.0) / static_cast<double>(n);
  return std::max(0.0, g);
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("pearson: series lengths differ");
  if (x.size() < 2) throw DomainError("pearson: need at least two points");
  auto constant = [](std::span<const double> s) {
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    return *lo == *hi;
  };
  if (constant(x) || constant(y)) return std::nullopt;
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace scifactor
