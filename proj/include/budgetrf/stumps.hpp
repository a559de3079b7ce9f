#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "budgetrf/dataset.hpp"
#include "budgetrf/random.hpp"

namespace budgetrf {

/// A one-feature threshold classifier with two outcomes: outcome 0 when
/// x[feature] <= threshold, outcome 1 otherwise. The boundary sits on the
/// left so serialized models route identically everywhere.
struct Stump {
  int feature = -1;
  double threshold = 0.0;

  int outcome(std::span<const double> example) const {
    return example[static_cast<std::size_t>(feature)] <= threshold ? 0 : 1;
  }

  bool operator==(const Stump&) const = default;
};

/// How many random candidate stumps to draw per feature, keyed on the size
/// of the node's example set: more examples justify a finer threshold
/// search.
struct StumpBudgetPolicy {
  std::size_t large_count = 80;  // example count > large_threshold
  std::size_t mid_count = 40;    // mid_threshold <= example count <= large_threshold
  std::size_t small_count = 20;  // example count < mid_threshold
  std::size_t large_threshold = 2000;
  std::size_t mid_threshold = 500;

  std::size_t candidate_count(std::size_t node_examples) const {
    if (node_examples > large_threshold) return large_count;
    if (node_examples >= mid_threshold) return mid_count;
    return small_count;
  }

  void validate() const {
    if (large_count < 1 || mid_count < 1 || small_count < 1)
      throw InvalidArgument("stump candidate counts must be at least 1");
  }
};

/// Min and max of one feature over a set of rows.
inline std::pair<double, double> feature_range(const Dataset& data,
                                               std::span<const RowIndex> rows, int feature) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (RowIndex r : rows) {
    const double v = data.at(r, static_cast<std::size_t>(feature));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

/// Draws N candidate stumps for one feature, thresholds uniform over the
/// observed [min, max] of the feature on the node's rows. Deterministic for
/// a fixed rng state. A feature that is constant on the rows yields only
/// degenerate candidates (every example routed to outcome 0); the risk rule
/// prices those at infinity.
inline std::vector<Stump> generate_candidates(const Dataset& data, std::span<const RowIndex> rows,
                                              int feature, const StumpBudgetPolicy& policy,
                                              Rng& rng) {
  if (rows.empty()) throw InvalidArgument("cannot generate stumps for an empty example set");
  const auto [lo, hi] = feature_range(data, rows, feature);
  const std::size_t count = policy.candidate_count(rows.size());
  std::vector<Stump> candidates;
  candidates.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    candidates.push_back(Stump{feature, rng.uniform_double(lo, hi)});
  }
  return candidates;
}

/// All distinct splits of one feature on the node's rows: one stump at the
/// midpoint of each adjacent pair of distinct observed values. This is the
/// exact inner search; on binary features it is the single useful stump.
inline std::vector<Stump> enumerate_candidates(const Dataset& data, std::span<const RowIndex> rows,
                                               int feature) {
  std::vector<double> values;
  values.reserve(rows.size());
  for (RowIndex r : rows) values.push_back(data.at(r, static_cast<std::size_t>(feature)));
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<Stump> candidates;
  candidates.reserve(values.size() > 0 ? values.size() - 1 : 0);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    candidates.push_back(Stump{feature, values[i] + (values[i + 1] - values[i]) / 2.0});
  }
  return candidates;
}

/// Partitions rows by stump outcome. The two sides are disjoint and cover
/// the input; relative row order is preserved.
inline std::pair<std::vector<RowIndex>, std::vector<RowIndex>> split(const Stump& stump,
                                                                     const Dataset& data,
                                                                     std::span<const RowIndex> rows) {
  std::pair<std::vector<RowIndex>, std::vector<RowIndex>> sides;
  for (RowIndex r : rows) {
    if (stump.outcome(data.row(r)) == 0) {
      sides.first.push_back(r);
    } else {
      sides.second.push_back(r);
    }
  }
  return sides;
}

}  // namespace budgetrf
