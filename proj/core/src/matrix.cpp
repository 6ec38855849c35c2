#include "deeprank/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "deeprank/error.hpp"

namespace deeprank {

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ArgumentError("numerics", "ragged matrix initializer");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

bool DenseMatrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix DenseMatrix::select_rows(std::span<const std::size_t> indices) const {
  DenseMatrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_), cols_,
                out.values_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
  }
  return out;
}

void DenseMatrix::append_row(std::span<const double> row) {
  if (rows_ == 0 && values_.empty()) cols_ = row.size();
  if (row.size() != cols_) throw ArgumentError("numerics", "append_row width mismatch");
  values_.insert(values_.end(), row.begin(), row.end());
  ++rows_;
}

}  // namespace deeprank
