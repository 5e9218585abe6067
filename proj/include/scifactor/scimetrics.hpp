#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "scifactor/text.hpp"

namespace scifactor {

// Largest h such that at least h entries are >= h.
std::uint32_t h_index(std::span<const std::uint32_t> citation_counts);

// Base-2 entropy of the distribution obtained by normalizing `counts`.
// Zero entries contribute nothing; throws DomainError when the input is empty,
// contains a negative/non-finite value, or sums to zero.
double shannon_entropy(std::span<const double> counts);

// Entropy of the empirical distribution of a token multiset. An empty
// multiset has entropy 0.
double token_entropy(std::span<const TermId> tokens);

// Sparse bag-of-terms vector, kept sorted by term id.
class TermVector {
 public:
  TermVector() = default;
  static TermVector from_terms(std::span<const TermId> terms);

  void add(TermId term, std::uint32_t count = 1);
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::uint32_t count(TermId term) const;
  const std::vector<std::pair<TermId, std::uint32_t>>& entries() const { return entries_; }

  TermVector scaled(std::uint32_t factor) const;

 private:
  std::vector<std::pair<TermId, std::uint32_t>> entries_;
};

// dot(a, b) / (|a| |b|); 0 when either side is empty.
double cosine_similarity(const TermVector& a, const TermVector& b);

// Lorenz-curve Gini coefficient 1 - (2 * sum_{m<n} P_m + 1) / n over groups
// sorted ascending, where P_m is the cumulative share of the first m groups.
// Returns 0 when the total is 0. Throws DomainError on empty input or on
// negative/non-finite values.
double gini_coefficient(std::span<const double> group_values);

// Sample Pearson correlation. std::nullopt when either series has zero
// variance. Throws DomainError on length mismatch or fewer than two points.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

}  // namespace scifactor
