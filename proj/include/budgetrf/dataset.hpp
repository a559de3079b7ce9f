#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "budgetrf/errors.hpp"

namespace budgetrf {

using RowIndex = std::uint32_t;

/// In-memory labeled dataset: a rectangular n x m feature matrix plus one
/// integer class label per row. Labels are contiguous ids 0..k-1; the
/// original label values from the source file are kept in label_values so
/// reports can show them.
struct Dataset {
  std::vector<double> values;  // row-major, n * m
  std::vector<int> labels;     // class ids in 0..k-1
  std::vector<double> label_values;        // class id -> original label
  std::vector<std::string> feature_names;  // empty, or one name per feature
  std::size_t n = 0;
  std::size_t m = 0;
  int num_classes = 0;

  double at(std::size_t row, std::size_t col) const { return values[row * m + col]; }

  std::span<const double> row(std::size_t r) const { return {values.data() + r * m, m}; }

  void validate() const {
    if (n < 1 || m < 1) throw InvalidArgument("dataset must have at least one row and one feature");
    if (values.size() != n * m) throw InvalidArgument("dataset matrix is not rectangular");
    if (labels.size() != n) throw InvalidArgument("dataset must have one label per row");
    if (num_classes < 2) throw InvalidArgument("dataset must have at least two classes");
    for (int y : labels) {
      if (y < 0 || y >= num_classes) throw InvalidArgument("label id out of range");
    }
    if (!feature_names.empty() && feature_names.size() != m)
      throw InvalidArgument("feature_names must be empty or have one entry per feature");
    if (!label_values.empty() && label_values.size() != static_cast<std::size_t>(num_classes))
      throw InvalidArgument("label_values must be empty or have one entry per class");
  }
};

/// All row indices of a dataset, in order. Node example sets are index
/// vectors into the backing dataset.
inline std::vector<RowIndex> all_rows(const Dataset& data) {
  std::vector<RowIndex> rows(data.n);
  for (std::size_t i = 0; i < data.n; ++i) rows[i] = static_cast<RowIndex>(i);
  return rows;
}

/// Per-feature acquisition prices. Every entry is strictly positive; the
/// unit is whatever the caller measures cost in.
struct CostVector {
  std::vector<double> values;

  CostVector() = default;
  explicit CostVector(std::vector<double> v) : values(std::move(v)) { validate(); }

  static CostVector uniform(std::size_t m) { return CostVector(std::vector<double>(m, 1.0)); }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }

  void validate() const {
    if (values.empty()) throw InvalidArgument("cost vector must not be empty");
    for (double c : values) {
      if (!(c > 0.0)) throw InvalidArgument("feature costs must be strictly positive");
    }
  }
};

}  // namespace budgetrf
