#include "scifactor/matrix.hpp"

#include <cmath>

#include "scifactor/error.hpp"

namespace scifactor {

DesignMatrix::DesignMatrix(std::size_t rows, std::vector<std::string> names)
    : rows_(rows), names_(std::move(names)), values_(rows * names_.size(), 0.0) {}

DesignMatrix::DesignMatrix(std::size_t rows, std::vector<std::string> names,
                           std::vector<double> values)
    : rows_(rows), names_(std::move(names)), values_(std::move(values)) {
  if (values_.size() != rows_ * names_.size()) {
    throw DataError("matrix values do not match " + std::to_string(rows_) + "x" +
                    std::to_string(names_.size()));
  }
}

std::vector<double> DesignMatrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

DesignMatrix DesignMatrix::take_rows(std::span<const std::size_t> rows) const {
  std::vector<double> values;
  values.reserve(rows.size() * cols());
  for (const auto r : rows) {
    const auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
  }
  return DesignMatrix(rows.size(), names_, std::move(values));
}

DesignMatrix DesignMatrix::take_columns(std::span<const std::size_t> cols) const {
  std::vector<std::string> names;
  for (const auto c : cols) names.push_back(names_.at(c));
  DesignMatrix out(rows_, std::move(names));
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols.size(); ++k) out.at(r, k) = (*this)(r, cols[k]);
  }
  return out;
}

void DesignMatrix::require_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError("non-finite value in column '" + names_[i % cols()] + "' row " +
                      std::to_string(i / cols()));
    }
  }
}

}  // namespace scifactor
