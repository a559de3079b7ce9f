#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "budgetrf/dataset.hpp"
#include "budgetrf/impurity.hpp"
#include "budgetrf/random.hpp"
#include "budgetrf/stumps.hpp"

namespace budgetrf {

/// A split's risk: feature cost divided by the worst-case impurity
/// reduction over the two outcomes. Kept as an exact cost/reduction pair so
/// splits compare as rationals, not as rounded doubles; reduction 0 encodes
/// an infinite risk (the split fails to reduce impurity on some outcome).
struct Risk {
  double cost = 0.0;                // numerator, > 0 for finite risks
  ImpurityValue reduction = 0;      // denominator; 0 means +infinity

  static Risk infinite() { return Risk{0.0, 0}; }

  bool is_infinite() const { return reduction == 0; }

  double value() const {
    return is_infinite() ? std::numeric_limits<double>::infinity()
                         : cost / static_cast<double>(reduction);
  }

  /// Three-way rational comparison. Exact whenever both costs are
  /// integer-valued (cross products are formed in 128-bit integers); other
  /// costs fall back to long-double cross products.
  static int compare(const Risk& a, const Risk& b) {
    if (a.is_infinite() && b.is_infinite()) return 0;
    if (a.is_infinite()) return 1;
    if (b.is_infinite()) return -1;
    const bool integral = a.cost == std::floor(a.cost) && b.cost == std::floor(b.cost) &&
                          a.cost <= 0x1p53 && b.cost <= 0x1p53;
    if (integral) {
      using u128 = unsigned __int128;
      const u128 lhs = static_cast<u128>(static_cast<std::uint64_t>(a.cost)) * b.reduction;
      const u128 rhs = static_cast<u128>(static_cast<std::uint64_t>(b.cost)) * a.reduction;
      return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
    }
    const long double lhs = static_cast<long double>(a.cost) * static_cast<long double>(b.reduction);
    const long double rhs = static_cast<long double>(b.cost) * static_cast<long double>(a.reduction);
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
  }

  friend bool operator<(const Risk& a, const Risk& b) { return compare(a, b) < 0; }
  friend bool operator==(const Risk& a, const Risk& b) { return compare(a, b) == 0; }
};

/// One node of a decision tree, stored flat in Tree::nodes. Internal nodes
/// hold a stump and child slots; leaves hold the training class counts and
/// the majority label.
struct TreeNode {
  Stump stump;
  std::int32_t left = -1;
  std::int32_t right = -1;
  ClassCounts counts;  // leaves only
  int label = -1;      // leaves only; argmax of counts, lowest id on ties

  bool is_leaf() const { return left < 0; }

  bool operator==(const TreeNode&) const = default;
};

/// A grown decision tree. Nodes are stored in depth-first preorder; node 0
/// is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  bool empty() const { return nodes.empty(); }

  bool operator==(const Tree&) const = default;
};

/// Counters reported by grow(): how often growth was cut short.
struct GrowStats {
  std::size_t forced_leaves = 0;       // impure nodes where every feature had infinite risk
  std::size_t depth_limited_leaves = 0;
};

struct GrowResult {
  Tree tree;
  GrowStats stats;
};

/// How the inner search over stumps is performed at each node.
enum class SplitSearch {
  RandomStumps,  // sampled thresholds, counts set by StumpBudgetPolicy
  Exhaustive,    // every distinct-value midpoint (exact inner minimization)
};

struct GrowConfig {
  ImpuritySpec spec = ImpuritySpec::threshold_pairs(0);
  StumpBudgetPolicy policy;
  SplitSearch search = SplitSearch::RandomStumps;
  std::size_t max_depth = 64;  // guards pathological recursion; hitting it forces a leaf
  std::function<void(const std::string&)> warn;  // optional sink for depth-guard warnings
};

inline ClassCounts class_counts(const Dataset& data, std::span<const RowIndex> rows) {
  ClassCounts counts(static_cast<std::size_t>(data.num_classes), 0);
  for (RowIndex r : rows) counts[static_cast<std::size_t>(data.labels[r])]++;
  return counts;
}

inline int majority_label(const ClassCounts& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

namespace detail {

/// Class counts on the outcome-0 side of a stump. The outcome-1 side is the
/// complement against the node totals.
inline ClassCounts left_counts(const Dataset& data, std::span<const RowIndex> rows,
                               const Stump& stump) {
  ClassCounts counts(static_cast<std::size_t>(data.num_classes), 0);
  for (RowIndex r : rows) {
    if (stump.outcome(data.row(r)) == 0) counts[static_cast<std::size_t>(data.labels[r])]++;
  }
  return counts;
}

}  // namespace detail

/// Risk of acquiring `feature` at this node: the best candidate stump's
/// worst-outcome price per unit of impurity removed,
///   min over candidates of max over outcomes of cost / (F(S) - F(outcome)).
/// Returns an infinite risk (and no stump) when every candidate leaves the
/// impurity unchanged on some outcome. Among equal-risk candidates the
/// first one in the list wins.
inline std::pair<Risk, std::optional<Stump>> risk(const Dataset& data,
                                                  std::span<const RowIndex> rows,
                                                  const std::vector<Stump>& candidates,
                                                  const ImpuritySpec& spec, double feature_cost,
                                                  ImpurityValue node_impurity) {
  Risk best = Risk::infinite();
  std::optional<Stump> best_stump;
  ClassCounts node = class_counts(data, rows);
  for (const Stump& stump : candidates) {
    const ClassCounts left = detail::left_counts(data, rows, stump);
    ClassCounts right(node.size());
    for (std::size_t c = 0; c < node.size(); ++c) right[c] = node[c] - left[c];
    const ImpurityValue worst = std::max(impurity(spec, left), impurity(spec, right));
    if (worst >= node_impurity) continue;  // no uniform reduction
    const Risk r{feature_cost, node_impurity - worst};
    if (Risk::compare(r, best) < 0) {
      best = r;
      best_stump = stump;
    }
  }
  return {best, best_stump};
}

/// Same, with the node impurity computed here and the feature's cost looked
/// up from the cost vector.
inline std::pair<Risk, std::optional<Stump>> risk(const Dataset& data,
                                                  std::span<const RowIndex> rows, int feature,
                                                  const std::vector<Stump>& candidates,
                                                  const ImpuritySpec& spec,
                                                  const CostVector& costs) {
  if (feature < 0 || static_cast<std::size_t>(feature) >= costs.size())
    throw InvalidArgument("risk: feature index out of range");
  const ImpurityValue node_impurity = impurity(spec, class_counts(data, rows));
  return risk(data, rows, candidates, spec, costs[static_cast<std::size_t>(feature)],
              node_impurity);
}

namespace detail {

struct BestSplit {
  Risk risk = Risk::infinite();
  Stump stump;
};

inline std::optional<BestSplit> find_best_split(const Dataset& data,
                                                std::span<const RowIndex> rows,
                                                const CostVector& costs, const GrowConfig& config,
                                                ImpurityValue node_impurity, Rng& rng) {
  std::optional<BestSplit> best;
  for (int feature = 0; feature < static_cast<int>(data.m); ++feature) {
    const std::vector<Stump> candidates =
        config.search == SplitSearch::Exhaustive
            ? enumerate_candidates(data, rows, feature)
            : generate_candidates(data, rows, feature, config.policy, rng);
    auto [r, stump] = risk(data, rows, candidates, config.spec,
                           costs[static_cast<std::size_t>(feature)], node_impurity);
    if (!stump) continue;
    // Strict comparison: ties keep the lowest feature index.
    if (!best || Risk::compare(r, best->risk) < 0) best = BestSplit{r, *stump};
  }
  return best;
}

inline std::int32_t grow_node(const Dataset& data, std::vector<RowIndex> rows,
                              const CostVector& costs, const GrowConfig& config, Rng& rng,
                              std::size_t depth, Tree& tree, GrowStats& stats) {
  const ClassCounts counts = class_counts(data, rows);
  const ImpurityValue node_impurity = impurity(config.spec, counts);

  const auto make_leaf = [&]() {
    const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
    TreeNode leaf;
    leaf.counts = counts;
    leaf.label = majority_label(counts);
    tree.nodes.push_back(std::move(leaf));
    return id;
  };

  if (node_impurity == 0) return make_leaf();
  if (depth >= config.max_depth) {
    stats.depth_limited_leaves++;
    if (config.warn)
      config.warn("depth limit " + std::to_string(config.max_depth) +
                  " reached on an impure node; forcing a leaf");
    return make_leaf();
  }

  const auto best = find_best_split(data, rows, costs, config, node_impurity, rng);
  if (!best) {
    // No feature reduces impurity on both outcomes; only a leaf terminates.
    stats.forced_leaves++;
    return make_leaf();
  }

  auto [left_rows, right_rows] = split(best->stump, data, rows);
  rows.clear();
  rows.shrink_to_fit();

  const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.nodes[id].stump = best->stump;
  const std::int32_t left = grow_node(data, std::move(left_rows), costs, config, rng, depth + 1, tree, stats);
  const std::int32_t right = grow_node(data, std::move(right_rows), costs, config, rng, depth + 1, tree, stats);
  tree.nodes[id].left = left;
  tree.nodes[id].right = right;
  return id;
}

}  // namespace detail

/// Grows one decision tree by recursive minimax cost-weighted-impurity
/// splitting: at each impure node, pick the feature (and stump) whose risk
/// is smallest, partition, and recurse until every leaf's impurity is zero
/// or no split helps. Features may be re-selected deeper in the tree.
/// Deterministic given the rng seed.
inline GrowResult grow(const Dataset& data, std::span<const RowIndex> rows,
                       const CostVector& costs, const GrowConfig& config, Rng& rng) {
  if (rows.empty()) throw InvalidArgument("cannot grow a tree on an empty example set");
  if (costs.size() != data.m) throw InvalidArgument("cost vector length must match feature count");
  config.policy.validate();
  GrowResult result;
  detail::grow_node(data, std::vector<RowIndex>(rows.begin(), rows.end()), costs, config, rng, 0,
                    result.tree, result.stats);
  return result;
}

inline GrowResult grow(const Dataset& data, const CostVector& costs, const GrowConfig& config,
                       Rng& rng) {
  const std::vector<RowIndex> rows = all_rows(data);
  return grow(data, rows, costs, config, rng);
}

inline GrowResult grow(const Dataset& data, const ImpuritySpec& spec, const CostVector& costs,
                       const StumpBudgetPolicy& policy, Rng& rng) {
  GrowConfig config;
  config.spec = spec;
  config.policy = policy;
  return grow(data, costs, config, rng);
}

/// Routes an example to a leaf and reports any features newly read along
/// the way into `acquired` (one flag per feature). Returns the leaf node.
inline const TreeNode& route(const Tree& tree, std::span<const double> example,
                             std::vector<std::uint8_t>& acquired) {
  const TreeNode* node = &tree.nodes[0];
  while (!node->is_leaf()) {
    acquired[static_cast<std::size_t>(node->stump.feature)] = 1;
    node = node->stump.outcome(example) == 0 ? &tree.nodes[static_cast<std::size_t>(node->left)]
                                             : &tree.nodes[static_cast<std::size_t>(node->right)];
  }
  return *node;
}

struct Classification {
  int label = -1;
  std::vector<int> acquired_features;  // distinct features on the path, ascending
};

/// Predicted label plus the set of distinct features read on the
/// root-to-leaf path. A feature tested several times appears once: it is
/// acquired once and reused for free afterwards.
inline Classification classify(const Tree& tree, const Dataset& data,
                               std::span<const double> example) {
  std::vector<std::uint8_t> acquired(data.m, 0);
  const TreeNode& leaf = route(tree, example, acquired);
  Classification result;
  result.label = leaf.label;
  for (std::size_t f = 0; f < acquired.size(); ++f) {
    if (acquired[f]) result.acquired_features.push_back(static_cast<int>(f));
  }
  return result;
}

/// Acquisition cost this example pays traversing the tree: the sum of costs
/// over the distinct features on its path.
inline double example_cost(const Tree& tree, const Dataset& data, std::span<const double> example,
                           const CostVector& costs) {
  std::vector<std::uint8_t> acquired(data.m, 0);
  route(tree, example, acquired);
  double total = 0.0;
  for (std::size_t f = 0; f < acquired.size(); ++f) {
    if (acquired[f]) total += costs[f];
  }
  return total;
}

/// Worst-case acquisition cost over a set of examples.
inline double max_cost(const Tree& tree, const Dataset& data, std::span<const RowIndex> rows,
                       const CostVector& costs) {
  if (rows.empty()) throw InvalidArgument("max_cost needs a non-empty example set");
  double worst = 0.0;
  for (RowIndex r : rows) worst = std::max(worst, example_cost(tree, data, data.row(r), costs));
  return worst;
}

inline double max_cost(const Tree& tree, const Dataset& data, const CostVector& costs) {
  const std::vector<RowIndex> rows = all_rows(data);
  return max_cost(tree, data, rows, costs);
}

}  // namespace budgetrf
