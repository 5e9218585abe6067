#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace scifactor {

enum class FactorGroup { Article, Venue, Author, Institution, Temporal };

inline constexpr std::array<FactorGroup, 5> kFactorGroups = {
    FactorGroup::Article, FactorGroup::Venue, FactorGroup::Author, FactorGroup::Institution,
    FactorGroup::Temporal};

std::string_view group_name(FactorGroup group);
std::optional<FactorGroup> parse_group(std::string_view name);

struct FeatureSpec {
  std::string_view name;
  FactorGroup group;
  std::string_view description;
};

// The 35 standard factors in report order.
std::span<const FeatureSpec> feature_catalog();

// Optional extension column (sum of citation-graph PageRank over the author's
// papers), appended after the standard factors when enabled.
const FeatureSpec& pr_pub_feature();

// Looks a name up in the catalog, including the optional extension.
std::optional<FactorGroup> feature_group(std::string_view name);

}  // namespace scifactor
