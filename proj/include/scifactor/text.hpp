#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace scifactor {

// Lowercases ASCII and splits on runs of non-alphanumeric bytes. Bytes >= 0x80
// are kept as part of tokens so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

using TermId = std::uint32_t;

// Interns tokens to dense ids.
class Vocabulary {
 public:
  TermId intern(std::string_view token);
  std::optional<TermId> find(std::string_view token) const;
  const std::string& token(TermId id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TermId> ids_;
};

// Minimal RFC 4180 helpers: fields containing ',', '"' or newlines are quoted.
std::string csv_escape(std::string_view field);
std::vector<std::string> split_csv_line(std::string_view line);

// Shortest representation with `digits` significant digits ("%.*g").
std::string format_real(double value, int digits = 10);

}  // namespace scifactor
