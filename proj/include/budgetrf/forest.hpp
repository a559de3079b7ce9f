#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "budgetrf/dataset.hpp"
#include "budgetrf/errors.hpp"
#include "budgetrf/impurity.hpp"
#include "budgetrf/random.hpp"
#include "budgetrf/stumps.hpp"
#include "budgetrf/tree.hpp"

namespace budgetrf {

/// An ordered ensemble plus everything needed to reproduce and apply it.
/// budget is the average-cost cap the forest was trained under; infinity
/// means training was not budget-constrained.
struct Forest {
  std::vector<Tree> trees;
  ImpuritySpec spec = ImpuritySpec::threshold_pairs(0);
  CostVector costs;
  double budget = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  std::size_t size() const { return trees.size(); }
  bool empty() const { return trees.empty(); }
};

struct BudgetConfig {
  double budget = std::numeric_limits<double>::infinity();
  std::size_t max_trees = 40;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  StumpBudgetPolicy policy;
  SplitSearch search = SplitSearch::RandomStumps;
  std::size_t max_depth = 64;
  std::function<void(const std::string&)> warn;

  void validate() const {
    // A zero budget is legal input; it simply reports as infeasible unless
    // the first tree is a bare leaf. NaN and negatives are rejected.
    if (!(budget >= 0.0)) throw InvalidArgument("budget must be non-negative");
    if (max_trees < 1) throw InvalidArgument("max_trees must be at least 1");
    if (threads < 1) throw InvalidArgument("threads must be at least 1");
    policy.validate();
  }
};

/// n examples drawn with replacement from the training set, deterministic
/// given the rng state.
inline Dataset bootstrap(const Dataset& train, Rng& rng) {
  train.validate();
  Dataset sample;
  sample.n = train.n;
  sample.m = train.m;
  sample.num_classes = train.num_classes;
  sample.label_values = train.label_values;
  sample.feature_names = train.feature_names;
  sample.values.reserve(train.n * train.m);
  sample.labels.reserve(train.n);
  for (std::size_t i = 0; i < train.n; ++i) {
    const std::size_t r = rng.uniform_index(train.n);
    const std::span<const double> row = train.row(r);
    sample.values.insert(sample.values.end(), row.begin(), row.end());
    sample.labels.push_back(train.labels[r]);
  }
  return sample;
}

/// Cost the forest charges one example: features are acquired once and
/// shared across trees, so this sums costs over the union of the per-tree
/// acquired sets.
inline double forest_example_cost(const Forest& forest, std::span<const double> example,
                                  const CostVector& costs) {
  if (forest.empty()) throw InvalidArgument("forest_example_cost needs a non-empty forest");
  std::vector<std::uint8_t> acquired(costs.size(), 0);
  for (const Tree& tree : forest.trees) route(tree, example, acquired);
  double total = 0.0;
  for (std::size_t f = 0; f < acquired.size(); ++f) {
    if (acquired[f]) total += costs[f];
  }
  return total;
}

/// Diagnostic upper bound on forest_example_cost: the plain sum of per-tree
/// path costs, with no sharing between trees.
inline double forest_example_cost_sum(const Forest& forest, std::span<const double> example,
                                      const CostVector& costs) {
  if (forest.empty()) throw InvalidArgument("forest_example_cost_sum needs a non-empty forest");
  double total = 0.0;
  std::vector<std::uint8_t> acquired(costs.size());
  for (const Tree& tree : forest.trees) {
    std::fill(acquired.begin(), acquired.end(), 0);
    route(tree, example, acquired);
    for (std::size_t f = 0; f < acquired.size(); ++f) {
      if (acquired[f]) total += costs[f];
    }
  }
  return total;
}

/// Mean forest_example_cost over a validation set; an empty forest costs 0.
inline double average_cost(const Forest& forest, const Dataset& validation,
                           const CostVector& costs) {
  validation.validate();
  if (forest.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < validation.n; ++r)
    total += forest_example_cost(forest, validation.row(r), costs);
  return total / static_cast<double>(validation.n);
}

enum class ForestStatus {
  Ok,
  BudgetInfeasible,  // even a single tree exceeded the budget; forest is empty
};

struct ForestResult {
  Forest forest;
  ForestStatus status = ForestStatus::Ok;
  double average_validation_cost = 0.0;
  GrowStats stats;
};

/// Budget-gated forest training: bootstrap, grow a tree, append it, and
/// stop (dropping the offending tree) as soon as the validation average
/// cost would exceed the budget. Trees may be grown in parallel waves of
/// config.threads, but admission is in tree-index order, so the result is
/// identical for any thread count.
inline ForestResult grow_forest(const Dataset& train, const Dataset& validation,
                                const BudgetConfig& config, const ImpuritySpec& spec,
                                const CostVector& costs) {
  train.validate();
  validation.validate();
  config.validate();
  if (costs.size() != train.m) throw InvalidArgument("cost vector length must match feature count");
  if (validation.m != train.m)
    throw InvalidArgument("train and validation feature counts differ");

  ForestResult result;
  result.forest.spec = spec;
  result.forest.costs = costs;
  result.forest.budget = config.budget;
  result.forest.seed = config.seed;

  struct GrownTree {
    GrowResult grown;
    std::vector<std::string> warnings;
  };
  const auto grow_one = [&](std::size_t index) {
    GrownTree out;
    Rng boot_rng(derive_seed(config.seed, StreamTag::Bootstrap, index));
    const Dataset sample = bootstrap(train, boot_rng);
    GrowConfig tree_config;
    tree_config.spec = spec;
    tree_config.policy = config.policy;
    tree_config.search = config.search;
    tree_config.max_depth = config.max_depth;
    if (config.warn)
      tree_config.warn = [&out](const std::string& message) { out.warnings.push_back(message); };
    Rng tree_rng(derive_seed(config.seed, StreamTag::Tree, index));
    out.grown = grow(sample, all_rows(sample), costs, tree_config, tree_rng);
    return out;
  };

  // Acquired-feature state per validation example, maintained across trees
  // so each admission pays only for newly read features.
  std::vector<std::uint8_t> acquired(validation.n * train.m, 0);
  double total_cost = 0.0;
  std::vector<std::uint8_t> path(train.m);

  std::size_t next = 0;
  bool stopped = false;
  while (next < config.max_trees && !stopped) {
    const std::size_t wave = std::min(config.threads, config.max_trees - next);
    std::vector<GrownTree> batch;
    batch.reserve(wave);
    if (wave == 1) {
      batch.push_back(grow_one(next));
    } else {
      std::vector<std::future<GrownTree>> futures;
      futures.reserve(wave);
      for (std::size_t w = 0; w < wave; ++w)
        futures.push_back(std::async(std::launch::async, grow_one, next + w));
      for (auto& f : futures) batch.push_back(f.get());
    }
    for (GrownTree& candidate : batch) {
      const Tree& tree = candidate.grown.tree;
      double delta = 0.0;
      std::vector<std::size_t> newly;
      for (std::size_t r = 0; r < validation.n; ++r) {
        std::fill(path.begin(), path.end(), 0);
        route(tree, validation.row(r), path);
        for (std::size_t f = 0; f < path.size(); ++f) {
          if (path[f] && !acquired[r * train.m + f]) {
            newly.push_back(r * train.m + f);
            delta += costs[f];
          }
        }
      }
      if ((total_cost + delta) / static_cast<double>(validation.n) > config.budget) {
        stopped = true;  // drop this tree and everything after it
        break;
      }
      total_cost += delta;
      for (std::size_t idx : newly) acquired[idx] = 1;
      result.forest.trees.push_back(std::move(candidate.grown.tree));
      result.stats.forced_leaves += candidate.grown.stats.forced_leaves;
      result.stats.depth_limited_leaves += candidate.grown.stats.depth_limited_leaves;
      if (config.warn) {
        for (const std::string& message : candidate.warnings) config.warn(message);
      }
    }
    next += wave;
  }

  result.average_validation_cost =
      result.forest.empty() ? 0.0 : total_cost / static_cast<double>(validation.n);
  result.status = result.forest.empty() ? ForestStatus::BudgetInfeasible : ForestStatus::Ok;
  return result;
}

/// Majority vote over the trees' leaf labels; ties go to the lowest class.
inline int predict(const Forest& forest, std::span<const double> example) {
  if (forest.empty()) throw InvalidArgument("predict needs a non-empty forest");
  std::vector<std::size_t> votes;
  std::vector<std::uint8_t> acquired(forest.costs.size(), 0);
  for (const Tree& tree : forest.trees) {
    const TreeNode& leaf = route(tree, example, acquired);
    if (static_cast<std::size_t>(leaf.label) >= votes.size()) votes.resize(leaf.label + 1, 0);
    votes[static_cast<std::size_t>(leaf.label)]++;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return static_cast<int>(best);
}

/// Binary-task score: pooled class-1 training mass over pooled total mass
/// of the leaves the example reaches.
inline double confidence(const Forest& forest, std::span<const double> example) {
  if (forest.empty()) throw InvalidArgument("confidence needs a non-empty forest");
  std::uint64_t class0 = 0;
  std::uint64_t class1 = 0;
  std::vector<std::uint8_t> acquired(forest.costs.size(), 0);
  for (const Tree& tree : forest.trees) {
    const TreeNode& leaf = route(tree, example, acquired);
    if (leaf.counts.size() != 2)
      throw InvalidArgument("confidence is defined for binary-labeled forests only");
    class0 += leaf.counts[0];
    class1 += leaf.counts[1];
  }
  return static_cast<double>(class1) / static_cast<double>(class0 + class1);
}

}  // namespace budgetrf
