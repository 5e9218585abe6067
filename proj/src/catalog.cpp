#include "scifactor/catalog.hpp"

namespace scifactor {

namespace {

using G = FactorGroup;

constexpr std::array<FeatureSpec, 35> kCatalog = {{
    {"Cits", G::Article, "total citations of the author's papers"},
    {"Num_pub", G::Article, "number of papers"},
    {"Ave_ci", G::Article, "mean citations per paper"},
    {"Hi_ci", G::Article, "citations of the most cited paper"},
    {"Lo_ci", G::Article, "citations of the least cited paper"},
    {"ATP", G::Article, "keyword popularity share, mean over window papers"},
    {"Hi_ci_ref", G::Article, "max citations among references, mean over window papers"},
    {"Ave_ci_ref", G::Article, "mean citations of references, mean over window papers"},
    {"Lo_ci_ref", G::Article, "min citations among references, mean over window papers"},
    {"Ave_num_ref", G::Article, "references per window paper"},
    {"Rel_ref", G::Article, "keyword entropy of paper/reference pairs, mean over window papers"},
    {"Sim", G::Article, "title+keyword cosine to references, mean over window papers"},
    {"PR_v", G::Venue, "venue score (PageRank by default), mean over window papers"},
    {"Ave_ci_v", G::Venue, "venue mean citations, mean over window papers"},
    {"h_v", G::Venue, "venue h-index, mean over window papers"},
    {"h_a", G::Author, "h-index"},
    {"PR_a", G::Author, "coauthor-network PageRank"},
    {"AIF", G::Author, "cutoff-year citations per paper of the preceding window"},
    {"Q", G::Author, "exp mean log(c+1) minus the snapshot baseline"},
    {"hmax_co", G::Author, "max coauthor h-index"},
    {"Num_co", G::Author, "number of distinct coauthors"},
    {"have_co", G::Author, "mean coauthor h-index"},
    {"hlo_co", G::Author, "min coauthor h-index"},
    {"hdif", G::Author, "max coauthor h-index minus own h-index"},
    {"Div", G::Author, "entropy of coauthor institutions plus coauthor keywords"},
    {"h_col", G::Institution, "mean colleague h-index"},
    {"Num_pub_col", G::Institution, "mean colleague paper count"},
    {"Cits_col", G::Institution, "mean colleague citations"},
    {"PR_col", G::Institution, "mean colleague coauthor PageRank"},
    {"G_h", G::Institution, "institution Gini of h-index"},
    {"G_cit", G::Institution, "institution Gini of citations"},
    {"G_pub", G::Institution, "institution Gini of paper counts"},
    {"GDP", G::Institution, "GDP of the institution's country"},
    {"Num_years", G::Temporal, "years since first paper"},
    {"Hindex_dif", G::Temporal, "h-index gain over the window"},
}};

constexpr FeatureSpec kPrPub = {"PR_pub", G::Author, "sum of citation PageRank over the author's papers"};

}  // namespace

std::string_view group_name(FactorGroup group) {
  switch (group) {
    case G::Article: return "Article";
    case G::Venue: return "Venue";
    case G::Author: return "Author";
    case G::Institution: return "Institution";
    case G::Temporal: return "Temporal";
  }
  return "?";
}

std::optional<FactorGroup> parse_group(std::string_view name) {
  for (const auto g : kFactorGroups) {
    if (group_name(g) == name) return g;
  }
  return std::nullopt;
}

std::span<const FeatureSpec> feature_catalog() { return kCatalog; }

const FeatureSpec& pr_pub_feature() { return kPrPub; }

std::optional<FactorGroup> feature_group(std::string_view name) {
  for (const auto& f : kCatalog) {
    if (f.name == name) return f.group;
  }
  if (name == kPrPub.name) return kPrPub.group;
  return std::nullopt;
}

}  // namespace scifactor
