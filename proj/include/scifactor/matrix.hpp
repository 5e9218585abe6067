#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace scifactor {

// Dense row-major real matrix with named columns.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  DesignMatrix(std::size_t rows, std::vector<std::string> names);
  DesignMatrix(std::size_t rows, std::vector<std::string> names, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::span<const double> values() const { return values_; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
  std::vector<double> column(std::size_t c) const;

  DesignMatrix take_rows(std::span<const std::size_t> rows) const;
  DesignMatrix take_columns(std::span<const std::size_t> cols) const;

  // Throws DataError if any cell is NaN or infinite.
  void require_finite() const;

 private:
  std::size_t rows_ = 0;
  std::vector<std::string> names_;
  std::vector<double> values_;
};

template <typename T>
std::vector<T> take(std::span<const T> values, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (const auto i : idx) out.push_back(values[i]);
  return out;
}

}  // namespace scifactor
