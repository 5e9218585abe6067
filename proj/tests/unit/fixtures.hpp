#pragma once

#include <string>
#include <vector>

#include "scifactor/corpus.hpp"

namespace fixtures {

// Authors are written "A1@I1" (affiliated) or "A1" (no affiliation).
inline scifactor::PaperRecord paper(std::string id, int year, std::vector<std::string> authors,
                                    std::vector<std::string> refs = {},
                                    std::vector<std::string> keywords = {},
                                    std::string venue = "V1", std::string title = "") {
  scifactor::PaperRecord p;
  p.id = std::move(id);
  p.year = year;
  p.venue = std::move(venue);
  p.title = std::move(title);
  p.keywords = std::move(keywords);
  p.references = std::move(refs);
  for (const auto& a : authors) {
    const auto at = a.find('@');
    scifactor::Authorship s;
    s.author_id = a.substr(0, at);
    s.author_name = "name " + s.author_id;
    if (at != std::string::npos) s.institution_id = a.substr(at + 1);
    p.authorships.push_back(s);
  }
  return p;
}

inline scifactor::InstitutionRecord institution(std::string id, std::string country = "C1") {
  return {id, "inst " + id, std::move(country), false};
}

inline scifactor::Corpus corpus(std::vector<scifactor::PaperRecord> papers,
                                std::vector<scifactor::InstitutionRecord> institutions = {},
                                scifactor::GdpTable gdp = {}) {
  return scifactor::Corpus::from_records(std::move(papers), std::move(institutions),
                                         std::move(gdp));
}

}  // namespace fixtures
