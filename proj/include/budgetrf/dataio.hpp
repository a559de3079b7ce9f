#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "budgetrf/dataset.hpp"
#include "budgetrf/detail/text.hpp"
#include "budgetrf/errors.hpp"
#include "budgetrf/forest.hpp"
#include "budgetrf/random.hpp"
#include "budgetrf/tree.hpp"

namespace budgetrf {

/// Reads a comma-separated numeric file into a Dataset. The label column is
/// named `label_column`; a string of digits is taken as a zero-based column
/// index instead, which is the only way to address columns in headerless
/// files. Labels are remapped to contiguous ids 0..k-1 in ascending order of
/// the original values, which are kept in label_values. Blank lines are
/// skipped; every other line must have the same number of fields.
inline Dataset load_csv(const std::string& path, const std::string& label_column,
                        bool has_header) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");

  Dataset d;
  std::vector<double> raw_labels;
  std::vector<std::string> header;
  std::size_t columns = 0;
  std::size_t label_index = 0;
  bool label_resolved = false;

  std::size_t numeric_index = 0;
  const bool label_by_index = detail::parse_index(label_column, numeric_index);

  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' &&
        line[2] == '\xBF') {
      line.erase(0, 3);
    }
    std::string_view view = line;
    if (detail::trim(view).empty()) continue;
    const auto fields = detail::split_fields(view);

    if (has_header && !saw_header) {
      saw_header = true;
      columns = fields.size();
      header.reserve(columns);
      for (auto f : fields) header.emplace_back(detail::trim(f));
      if (label_by_index) {
        label_index = numeric_index;
      } else {
        const auto it = std::find(header.begin(), header.end(), label_column);
        if (it == header.end())
          throw DataError(path, line_no, "label column '" + label_column + "' not found in header");
        label_index = static_cast<std::size_t>(it - header.begin());
      }
      if (label_index >= columns)
        throw DataError(path, line_no,
                        "label column index " + std::to_string(label_index) + " out of range for " +
                            std::to_string(columns) + " columns");
      label_resolved = true;
      continue;
    }

    if (columns == 0) {
      columns = fields.size();
      if (!label_by_index)
        throw DataError(path, line_no, "label column '" + label_column +
                                           "' requires a header row; use a column index instead");
      label_index = numeric_index;
      if (label_index >= columns)
        throw DataError(path, line_no,
                        "label column index " + std::to_string(label_index) + " out of range for " +
                            std::to_string(columns) + " columns");
      label_resolved = true;
    }
    if (fields.size() != columns)
      throw DataError(path, line_no, "expected " + std::to_string(columns) + " fields, got " +
                                         std::to_string(fields.size()));

    for (std::size_t c = 0; c < columns; ++c) {
      double v = 0.0;
      if (!detail::parse_double(fields[c], v))
        throw DataError(path, line_no,
                        "field " + std::to_string(c + 1) + " is not numeric: '" +
                            std::string(detail::trim(fields[c])) + "'");
      if (c == label_index) {
        raw_labels.push_back(v);
      } else {
        d.values.push_back(v);
      }
    }
  }

  if (raw_labels.empty()) throw DataError(path + ": no data rows");
  if (!label_resolved || columns < 2)
    throw DataError(path + ": need at least one feature column besides the label");

  d.n = raw_labels.size();
  d.m = columns - 1;

  std::vector<double> distinct = raw_labels;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw DataError(path + ": need at least two distinct label values");
  d.label_values = distinct;
  d.num_classes = static_cast<int>(distinct.size());
  d.labels.reserve(d.n);
  for (double raw : raw_labels) {
    const auto it = std::lower_bound(distinct.begin(), distinct.end(), raw);
    d.labels.push_back(static_cast<int>(it - distinct.begin()));
  }

  if (!header.empty()) {
    d.feature_names.reserve(d.m);
    for (std::size_t c = 0; c < columns; ++c) {
      if (c != label_index) d.feature_names.push_back(header[c]);
    }
  }

  d.validate();
  return d;
}

/// Writes a Dataset as CSV with a header row; the label column is last and
/// named "label". Values are printed in shortest round-trip form, so loading
/// the file back reproduces the matrix bit for bit.
inline void save_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open file for writing");
  for (std::size_t j = 0; j < data.m; ++j) {
    if (j > 0) out << ',';
    if (data.feature_names.empty()) {
      out << 'f' << j;
    } else {
      out << data.feature_names[j];
    }
  }
  out << ",label\n";
  for (std::size_t r = 0; r < data.n; ++r) {
    for (std::size_t j = 0; j < data.m; ++j) {
      if (j > 0) out << ',';
      out << detail::format_double(data.at(r, j));
    }
    const double label = data.label_values.empty() ? static_cast<double>(data.labels[r])
                                                   : data.label_values[data.labels[r]];
    out << ',' << detail::format_double(label) << '\n';
  }
  if (!out) throw DataError(path + ": write failed");
}

/// Reads exactly m strictly positive costs, separated by newlines or commas.
inline CostVector load_costs(const std::string& path, std::size_t m) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (auto field : detail::split_fields(line)) {
      field = detail::trim(field);
      if (field.empty()) continue;
      double v = 0.0;
      if (!detail::parse_double(field, v))
        throw DataError(path, line_no, "cost is not numeric: '" + std::string(field) + "'");
      if (!(v > 0.0))
        throw DataError(path, line_no, "cost must be strictly positive: " + std::string(field));
      values.push_back(v);
    }
  }
  if (values.size() != m)
    throw DataError(path + ": expected " + std::to_string(m) + " costs, found " +
                    std::to_string(values.size()));
  return CostVector(std::move(values));
}

/// Bins each feature into `levels` uniform intervals over its own [min, max]
/// range, replacing values with bin indices 0..levels-1. Bins are half-open
/// except the last, so the maximum lands in bin levels-1 instead of falling
/// off the top. Constant features map to bin 0. Binning is monotone per
/// feature: x <= y implies bin(x) <= bin(y).
inline Dataset quantize(const Dataset& data, std::size_t levels = 10) {
  data.validate();
  if (levels < 2) throw InvalidArgument("quantize needs at least two levels");
  Dataset out = data;
  for (std::size_t j = 0; j < data.m; ++j) {
    double lo = data.at(0, j);
    double hi = lo;
    for (std::size_t r = 1; r < data.n; ++r) {
      lo = std::min(lo, data.at(r, j));
      hi = std::max(hi, data.at(r, j));
    }
    if (!(hi > lo)) {
      for (std::size_t r = 0; r < data.n; ++r) out.values[r * data.m + j] = 0.0;
      continue;
    }
    const double width = (hi - lo) / static_cast<double>(levels);
    for (std::size_t r = 0; r < data.n; ++r) {
      auto bin = static_cast<std::size_t>((data.at(r, j) - lo) / width);
      if (bin >= levels) bin = levels - 1;
      out.values[r * data.m + j] = static_cast<double>(bin);
    }
  }
  return out;
}

/// Collapses rows with identical feature vectors into one row, labeled by
/// the most common label among them (ties go to the lowest class id).
/// Surviving rows keep their first-appearance order, so the operation is
/// idempotent and deterministic.
inline Dataset dedup(const Dataset& data) {
  data.validate();
  std::map<std::vector<double>, std::size_t> group_of;
  std::vector<std::vector<double>> rows;
  std::vector<ClassCounts> counts;
  for (std::size_t r = 0; r < data.n; ++r) {
    std::vector<double> row(data.row(r).begin(), data.row(r).end());
    auto [it, inserted] = group_of.try_emplace(std::move(row), rows.size());
    if (inserted) {
      rows.push_back(it->first);
      counts.emplace_back(static_cast<std::size_t>(data.num_classes), 0);
    }
    ++counts[it->second][static_cast<std::size_t>(data.labels[r])];
  }

  Dataset out;
  out.m = data.m;
  out.n = rows.size();
  out.num_classes = data.num_classes;
  out.label_values = data.label_values;
  out.feature_names = data.feature_names;
  out.values.reserve(out.n * out.m);
  out.labels.reserve(out.n);
  for (std::size_t g = 0; g < rows.size(); ++g) {
    out.values.insert(out.values.end(), rows[g].begin(), rows[g].end());
    out.labels.push_back(majority_label(counts[g]));
  }
  out.validate();
  return out;
}

/// How to carve one dataset into train/validation/test. Explicit index files
/// win over fractions, so fixed published splits reproduce exactly. With
/// fractions, rows are shuffled by the caller's Rng and cut; fractions must
/// be non-negative and sum to 1.
struct SplitSpec {
  double train_fraction = 0.6;
  double validation_fraction = 0.2;
  double test_fraction = 0.2;
  std::string train_index_file;       // newline-separated zero-based row indices
  std::string validation_index_file;  // required alongside train_index_file
  std::string test_index_file;        // optional; unlisted rows become test rows

  bool uses_index_files() const { return !train_index_file.empty(); }
};

struct SplitIndices {
  std::vector<RowIndex> train;
  std::vector<RowIndex> validation;
  std::vector<RowIndex> test;
};

/// Reads newline-separated zero-based row indices, all below n.
inline std::vector<RowIndex> load_index_file(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  std::vector<RowIndex> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    std::size_t idx = 0;
    if (!detail::parse_index(view, idx))
      throw DataError(path, line_no, "not a row index: '" + std::string(view) + "'");
    if (idx >= n)
      throw DataError(path, line_no, "row index " + std::to_string(idx) + " out of range for " +
                                         std::to_string(n) + " rows");
    rows.push_back(static_cast<RowIndex>(idx));
  }
  return rows;
}

/// Partitions 0..n-1 per the SplitSpec. Index files are checked to be
/// disjoint; with a test file present the three must cover every row, and
/// without one the leftovers become the test set. Fraction splits shuffle
/// with the given Rng, then cut, and return each part in ascending order.
inline SplitIndices split_rows(std::size_t n, const SplitSpec& spec, Rng& rng) {
  if (n == 0) throw InvalidArgument("cannot split an empty dataset");
  SplitIndices out;
  if (spec.uses_index_files()) {
    if (spec.validation_index_file.empty())
      throw InvalidArgument("a train index file requires a validation index file");
    out.train = load_index_file(spec.train_index_file, n);
    out.validation = load_index_file(spec.validation_index_file, n);
    const bool explicit_test = !spec.test_index_file.empty();
    if (explicit_test) out.test = load_index_file(spec.test_index_file, n);

    std::vector<std::uint8_t> seen(n, 0);
    auto claim = [&](const std::vector<RowIndex>& rows, const std::string& path) {
      for (RowIndex r : rows) {
        if (seen[r])
          throw DataError(path + ": row " + std::to_string(r) + " appears in two split parts");
        seen[r] = 1;
      }
    };
    claim(out.train, spec.train_index_file);
    claim(out.validation, spec.validation_index_file);
    if (explicit_test) claim(out.test, spec.test_index_file);
    for (std::size_t r = 0; r < n; ++r) {
      if (seen[r]) continue;
      if (explicit_test)
        throw DataError(spec.train_index_file + ": row " + std::to_string(r) +
                        " is not assigned to any split part");
      out.test.push_back(static_cast<RowIndex>(r));
    }
    return out;
  }

  const double f_train = spec.train_fraction;
  const double f_val = spec.validation_fraction;
  const double f_test = spec.test_fraction;
  if (!(f_train >= 0.0) || !(f_val >= 0.0) || !(f_test >= 0.0) ||
      std::abs(f_train + f_val + f_test - 1.0) > 1e-9)
    throw InvalidArgument("split fractions must be non-negative and sum to 1");

  std::vector<RowIndex> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<RowIndex>(i);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.uniform_index(i + 1);
    std::swap(order[i], order[j]);
  }
  auto n_train = static_cast<std::size_t>(std::llround(f_train * static_cast<double>(n)));
  auto n_val = static_cast<std::size_t>(std::llround(f_val * static_cast<double>(n)));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                        order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

/// Materializes the selected rows as a standalone Dataset. Class metadata is
/// copied unchanged, so label ids still line up across split parts.
inline Dataset subset(const Dataset& data, const std::vector<RowIndex>& rows) {
  data.validate();
  if (rows.empty()) throw InvalidArgument("subset needs at least one row");
  Dataset out;
  out.m = data.m;
  out.n = rows.size();
  out.num_classes = data.num_classes;
  out.label_values = data.label_values;
  out.feature_names = data.feature_names;
  out.values.reserve(out.n * out.m);
  out.labels.reserve(out.n);
  for (RowIndex r : rows) {
    if (r >= data.n) throw InvalidArgument("subset row index out of range");
    out.values.insert(out.values.end(), data.row(r).begin(), data.row(r).end());
    out.labels.push_back(data.labels[r]);
  }
  out.validate();
  return out;
}

/// A trained forest plus the label and feature metadata needed to report
/// predictions in the source file's terms.
struct Model {
  Forest forest;
  std::vector<double> label_values;        // class id -> original label; may be empty
  std::vector<std::string> feature_names;  // may be empty
};

inline constexpr const char* kModelFormat = "budgetrf-forest";
inline constexpr int kModelVersion = 1;

namespace detail {

inline nlohmann::json spec_to_json(const ImpuritySpec& spec) {
  nlohmann::json j;
  switch (spec.kind()) {
    case ImpurityKind::ThresholdPairs:
      j["kind"] = "pairs";
      j["alpha"] = spec.alpha();
      break;
    case ImpurityKind::Powers:
      j["kind"] = "powers";
      j["power"] = spec.power();
      break;
    case ImpurityKind::Polynomial: {
      j["kind"] = "polynomial";
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& t : spec.terms()) {
        terms.push_back({{"coefficient", t.coefficient}, {"exponents", t.exponents}});
      }
      j["terms"] = std::move(terms);
      break;
    }
  }
  return j;
}

inline ImpuritySpec spec_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "pairs") return ImpuritySpec::threshold_pairs(j.at("alpha").get<Count>());
  if (kind == "powers") return ImpuritySpec::powers(j.at("power").get<std::uint32_t>());
  if (kind == "polynomial") {
    std::vector<PolynomialTerm> terms;
    for (const auto& t : j.at("terms")) {
      PolynomialTerm term;
      term.coefficient = t.at("coefficient").get<std::uint64_t>();
      term.exponents = t.at("exponents").get<std::vector<std::uint32_t>>();
      terms.push_back(std::move(term));
    }
    return ImpuritySpec::polynomial(std::move(terms));
  }
  throw ModelError("unknown impurity kind '" + kind + "'");
}

inline nlohmann::json tree_to_json(const Tree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& node : tree.nodes) {
    if (node.is_leaf()) {
      nodes.push_back({{"counts", node.counts}, {"label", node.label}});
    } else {
      nodes.push_back({{"feature", node.stump.feature},
                       {"threshold", node.stump.threshold},
                       {"left", node.left},
                       {"right", node.right}});
    }
  }
  return nlohmann::json{{"nodes", std::move(nodes)}};
}

inline Tree tree_from_json(const nlohmann::json& j) {
  Tree tree;
  const auto& nodes = j.at("nodes");
  if (!nodes.is_array() || nodes.empty()) throw ModelError("tree has no nodes");
  const auto count = static_cast<std::int64_t>(nodes.size());
  for (const auto& jn : nodes) {
    TreeNode node;
    if (jn.contains("feature")) {
      node.stump.feature = jn.at("feature").get<int>();
      node.stump.threshold = jn.at("threshold").get<double>();
      node.left = jn.at("left").get<std::int32_t>();
      node.right = jn.at("right").get<std::int32_t>();
      if (node.stump.feature < 0) throw ModelError("tree node feature index must be non-negative");
      if (node.left < 0 || node.left >= count || node.right < 0 || node.right >= count)
        throw ModelError("tree node child index out of range");
    } else {
      node.counts = jn.at("counts").get<ClassCounts>();
      node.label = jn.at("label").get<int>();
      if (node.label < 0) throw ModelError("leaf label must be non-negative");
    }
    tree.nodes.push_back(std::move(node));
  }
  return tree;
}

}  // namespace detail

/// Serializes a model as versioned JSON. Object keys are emitted in sorted
/// order and doubles in shortest round-trip form, so equal models produce
/// byte-identical files.
inline void save_model(const Model& model, const std::string& path) {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["impurity"] = detail::spec_to_json(model.forest.spec);
  j["costs"] = model.forest.costs.values;
  if (std::isinf(model.forest.budget)) {
    j["budget"] = nullptr;
  } else {
    j["budget"] = model.forest.budget;
  }
  j["seed"] = model.forest.seed;
  j["label_values"] = model.label_values;
  j["feature_names"] = model.feature_names;
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : model.forest.trees) trees.push_back(detail::tree_to_json(tree));
  j["trees"] = std::move(trees);

  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open file for writing");
  out << j.dump(2) << '\n';
  if (!out) throw DataError(path + ": write failed");
}

/// Loads a model saved by save_model. The format tag and version must match;
/// malformed or truncated files raise ModelError.
inline Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (detail::trim(text).empty()) throw ModelError(path + ": model file is empty");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(path + ": cannot parse model file: " + e.what());
  }

  try {
    const std::string format = j.at("format").get<std::string>();
    if (format != kModelFormat)
      throw ModelError(path + ": not a " + std::string(kModelFormat) + " file (format '" +
                       format + "')");
    const int version = j.at("version").get<int>();
    if (version != kModelVersion)
      throw ModelError(path + ": unsupported model version " + std::to_string(version) +
                       " (expected " + std::to_string(kModelVersion) + ")");

    Model model;
    model.forest.spec = detail::spec_from_json(j.at("impurity"));
    try {
      model.forest.costs = CostVector(j.at("costs").get<std::vector<double>>());
    } catch (const InvalidArgument& e) {
      throw ModelError(path + ": bad cost vector: " + e.what());
    }
    const auto& budget = j.at("budget");
    if (budget.is_null()) {
      model.forest.budget = std::numeric_limits<double>::infinity();
    } else {
      model.forest.budget = budget.get<double>();
      if (!(model.forest.budget >= 0.0)) throw ModelError(path + ": budget must be non-negative");
    }
    model.forest.seed = j.at("seed").get<std::uint64_t>();
    model.label_values = j.at("label_values").get<std::vector<double>>();
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& jt : j.at("trees")) model.forest.trees.push_back(detail::tree_from_json(jt));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(path + ": malformed model file: " + e.what());
  }
}

}  // namespace budgetrf
