#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "budgetrf/dataset.hpp"
#include "budgetrf/errors.hpp"
#include "budgetrf/impurity.hpp"
#include "budgetrf/random.hpp"
#include "budgetrf/stumps.hpp"

namespace budgetrf {

/// A discrete instance small enough for exact optimal-cost search: binary
/// feature values, positive integer costs, and an impurity spec. Identical
/// feature rows must be pure as a group (zero impurity), or no tree can
/// reach zero impurity at every leaf.
struct SmallInstance {
  Dataset data;
  CostVector costs;
  ImpuritySpec spec = ImpuritySpec::threshold_pairs(0);

  static constexpr std::size_t kMaxExamples = 4096;
  static constexpr std::size_t kMaxFeatures = 16;

  void validate() const {
    data.validate();
    costs.validate();
    if (costs.size() != data.m)
      throw InvalidArgument("instance cost vector length must match feature count");
    if (data.n > kMaxExamples)
      throw InvalidArgument("instance exceeds the example limit (" +
                            std::to_string(kMaxExamples) + ")");
    if (data.m > kMaxFeatures)
      throw InvalidArgument("instance exceeds the feature limit (" +
                            std::to_string(kMaxFeatures) + ")");
    for (double v : data.values) {
      if (v != 0.0 && v != 1.0) throw InvalidArgument("instance features must be binary (0/1)");
    }
    for (std::size_t i = 0; i < costs.size(); ++i) {
      if (costs[i] != std::floor(costs[i]) || costs[i] < 1.0)
        throw InvalidArgument("instance costs must be positive integers");
    }
    // Rows with identical feature values can never be separated; their
    // class counts must already be pure under the impurity spec.
    std::unordered_map<std::uint32_t, ClassCounts> groups;
    for (std::size_t r = 0; r < data.n; ++r) {
      std::uint32_t pattern = 0;
      for (std::size_t f = 0; f < data.m; ++f) {
        if (data.at(r, f) == 1.0) pattern |= (1u << f);
      }
      auto [it, inserted] = groups.try_emplace(
          pattern, ClassCounts(static_cast<std::size_t>(data.num_classes), 0));
      it->second[static_cast<std::size_t>(data.labels[r])]++;
    }
    for (const auto& [pattern, counts] : groups) {
      if (impurity(spec, counts) != 0)
        throw InvalidArgument(
            "instance has identical feature rows with impure labels; no tree separates them");
    }
  }
};

namespace detail {

/// Example subsets as fixed-width bitmasks, the memoization key of the
/// optimal-cost search.
struct SubsetKey {
  std::vector<std::uint64_t> words;

  bool operator==(const SubsetKey&) const = default;

  bool empty() const {
    for (std::uint64_t w : words) {
      if (w != 0) return false;
    }
    return true;
  }
};

struct SubsetKeyHash {
  std::size_t operator()(const SubsetKey& key) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint64_t w : key.words) h = mix64(h ^ w);
    return static_cast<std::size_t>(h);
  }
};

/// Memoized search for the cheapest zero-impurity tree. States are example
/// subsets; at each impure subset every feature that is not constant on it
/// is tried with its single useful binary split. A binary feature is
/// constant on both sides once split, so skipping constant features is what
/// limits every feature to one use per root-to-leaf path.
class OptimalCostSearch {
 public:
  explicit OptimalCostSearch(const SmallInstance& instance)
      : instance_(instance), words_((instance.data.n + 63) / 64) {
    const Dataset& data = instance.data;
    ones_.assign(data.m, std::vector<std::uint64_t>(words_, 0));
    classes_.assign(static_cast<std::size_t>(data.num_classes),
                    std::vector<std::uint64_t>(words_, 0));
    for (std::size_t r = 0; r < data.n; ++r) {
      const std::uint64_t bit = 1ull << (r % 64);
      classes_[static_cast<std::size_t>(data.labels[r])][r / 64] |= bit;
      for (std::size_t f = 0; f < data.m; ++f) {
        if (data.at(r, f) == 1.0) ones_[f][r / 64] |= bit;
      }
    }
  }

  double run() {
    SubsetKey full;
    full.words.assign(words_, ~0ull);
    if (instance_.data.n % 64 != 0) full.words.back() = ~0ull >> (64 - instance_.data.n % 64);
    return solve(full);
  }

 private:
  ClassCounts counts_of(const SubsetKey& subset) const {
    ClassCounts counts(classes_.size(), 0);
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      for (std::size_t w = 0; w < words_; ++w)
        counts[c] += static_cast<Count>(std::popcount(subset.words[w] & classes_[c][w]));
    }
    return counts;
  }

  double solve(const SubsetKey& subset) {
    if (auto it = memo_.find(subset); it != memo_.end()) return it->second;
    if (impurity(instance_.spec, counts_of(subset)) == 0) {
      memo_.emplace(subset, 0.0);
      return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    SubsetKey side0{std::vector<std::uint64_t>(words_)};
    SubsetKey side1{std::vector<std::uint64_t>(words_)};
    for (std::size_t f = 0; f < instance_.data.m; ++f) {
      for (std::size_t w = 0; w < words_; ++w) {
        side1.words[w] = subset.words[w] & ones_[f][w];
        side0.words[w] = subset.words[w] & ~ones_[f][w];
      }
      if (side1.empty() || side0.empty()) continue;  // constant here; reuse is never useful
      const double below = std::max(solve(side0), solve(side1));
      best = std::min(best, instance_.costs[f] + below);
    }
    if (!std::isfinite(best))
      throw Error("optimal-cost search reached an unsplittable impure subset");
    memo_.emplace(subset, best);
    return best;
  }

  const SmallInstance& instance_;
  std::size_t words_;
  std::vector<std::vector<std::uint64_t>> ones_;     // per feature: rows with value 1
  std::vector<std::vector<std::uint64_t>> classes_;  // per class: rows with that label
  std::unordered_map<SubsetKey, double, SubsetKeyHash> memo_;
};

}  // namespace detail

/// Exact minimum, over all trees whose every leaf has zero impurity and
/// that use each feature at most once per path, of the worst-case feature
/// acquisition cost paid by a single example.
inline double opt_max_cost(const SmallInstance& instance) {
  instance.validate();
  detail::OptimalCostSearch search(instance);
  return search.run();
}

namespace detail {

inline double naive_opt(const SmallInstance& instance, const std::vector<RowIndex>& rows,
                        std::uint32_t available) {
  ClassCounts counts(static_cast<std::size_t>(instance.data.num_classes), 0);
  for (RowIndex r : rows) counts[static_cast<std::size_t>(instance.data.labels[r])]++;
  if (impurity(instance.spec, counts) == 0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < instance.data.m; ++f) {
    if (!(available & (1u << f))) continue;
    std::vector<RowIndex> side0;
    std::vector<RowIndex> side1;
    for (RowIndex r : rows) {
      (instance.data.at(r, f) == 0.0 ? side0 : side1).push_back(r);
    }
    const std::uint32_t rest = available & ~(1u << f);
    const double below = std::max(naive_opt(instance, side0, rest),
                                  naive_opt(instance, side1, rest));
    best = std::min(best, instance.costs[f] + below);
  }
  return best;
}

}  // namespace detail

/// Independent second oracle: plain recursion over every ordering of the
/// remaining features, no memoization, degenerate splits included. Only for
/// tiny instances; exists to cross-check opt_max_cost.
inline double naive_opt_max_cost(const SmallInstance& instance) {
  instance.validate();
  if (instance.data.m > 6 || instance.data.n > 16)
    throw InvalidArgument("naive oracle only accepts up to 6 features and 16 examples");
  const std::vector<RowIndex> rows = all_rows(instance.data);
  const std::uint32_t available = (1u << instance.data.m) - 1;
  return detail::naive_opt(instance, rows, available);
}

/// The two-feature tie-break toy: 30 examples of class 1 and 30 of class 2,
/// with one stump per feature. t1 carves off 20 class-2 examples, leaving a
/// (30,10) side; t2 splits both classes evenly, (15,15) per side.
struct Figure1Toy {
  Dataset data;
  CostVector costs;  // unit
  Stump t1;
  Stump t2;
};

inline Figure1Toy gen_figure1_toy() {
  Figure1Toy toy;
  Dataset& d = toy.data;
  d.m = 2;
  d.num_classes = 2;
  d.label_values = {1.0, 2.0};
  d.feature_names = {"t1", "t2"};
  const auto add_rows = [&d](std::size_t count, int label, double f0, double f1) {
    for (std::size_t i = 0; i < count; ++i) {
      d.values.push_back(f0);
      d.values.push_back(f1);
      d.labels.push_back(label);
    }
  };
  add_rows(15, 0, 0.0, 0.0);  // class 1
  add_rows(15, 0, 0.0, 1.0);
  add_rows(5, 1, 0.0, 0.0);   // class 2, on t1's mixed side
  add_rows(5, 1, 0.0, 1.0);
  add_rows(10, 1, 1.0, 0.0);  // class 2, isolated by t1
  add_rows(10, 1, 1.0, 1.0);
  d.n = d.labels.size();
  d.validate();
  toy.costs = CostVector::uniform(2);
  toy.t1 = Stump{0, 0.5};
  toy.t2 = Stump{1, 0.5};
  return toy;
}

/// 1024 examples, one per 10-bit integer (feature f is bit f), in 4
/// classes. Each quarter [256q, 256(q+1)) carries label q+1 except its
/// first example, which takes the next quarter's label (and the last
/// quarter's first example wraps to label 1). Every feature row is
/// distinct, so a zero-error tree exists, but the displaced examples force
/// it to read all 10 bits.
inline Dataset gen_synthetic_1024() {
  Dataset d;
  d.n = 1024;
  d.m = 10;
  d.num_classes = 4;
  d.label_values = {1.0, 2.0, 3.0, 4.0};
  d.values.reserve(d.n * d.m);
  d.labels.reserve(d.n);
  for (std::size_t f = 0; f < d.m; ++f) d.feature_names.push_back("b" + std::to_string(f));
  for (std::uint32_t i = 0; i < 1024; ++i) {
    for (std::size_t f = 0; f < d.m; ++f) d.values.push_back((i >> f) & 1u ? 1.0 : 0.0);
    int label_value = static_cast<int>(i >> 8) + 1;
    if (i % 256 == 0) label_value = label_value % 4 + 1;
    d.labels.push_back(label_value - 1);
  }
  d.validate();
  return d;
}

struct RedundantSyntheticOptions {
  std::size_t examples = 600;
  std::size_t signal_count = 3;    // latent binary signals; the label is their majority
  double flip_probability = 0.02;  // independent per-copy noise
};

/// Binary-feature data where every latent signal appears twice: as a cheap
/// copy (cost 1) and as an expensive copy (cost 100), equally informative
/// up to independent flip noise. Cost-blind induction picks either copy;
/// cost-weighted induction should all but always pick the cheap one.
struct RedundantSynthetic {
  Dataset data;
  CostVector costs;  // alternating 1, 100, 1, 100, ...
};

inline RedundantSynthetic gen_redundant_cost_synthetic(
    std::uint64_t seed, const RedundantSyntheticOptions& options = {}) {
  if (options.examples < 2) throw InvalidArgument("redundant synthetic needs at least 2 examples");
  if (options.signal_count < 1 || options.signal_count % 2 == 0)
    throw InvalidArgument("redundant synthetic needs an odd number of signals");
  if (!(options.flip_probability >= 0.0) || options.flip_probability >= 0.5)
    throw InvalidArgument("flip probability must lie in [0, 0.5)");
  RedundantSynthetic out;
  Dataset& d = out.data;
  d.n = options.examples;
  d.m = 2 * options.signal_count;
  d.num_classes = 2;
  d.label_values = {0.0, 1.0};
  std::vector<double> costs;
  for (std::size_t s = 0; s < options.signal_count; ++s) {
    d.feature_names.push_back("sig" + std::to_string(s) + "_cheap");
    d.feature_names.push_back("sig" + std::to_string(s) + "_costly");
    costs.push_back(1.0);
    costs.push_back(100.0);
  }
  Rng rng(derive_seed(seed, StreamTag::Instance, 0));
  d.values.reserve(d.n * d.m);
  d.labels.reserve(d.n);
  for (std::size_t r = 0; r < d.n; ++r) {
    std::size_t active = 0;
    for (std::size_t s = 0; s < options.signal_count; ++s) {
      const bool signal = rng.bernoulli(0.5);
      if (signal) active++;
      const bool cheap = signal != rng.bernoulli(options.flip_probability);
      const bool costly = signal != rng.bernoulli(options.flip_probability);
      d.values.push_back(cheap ? 1.0 : 0.0);
      d.values.push_back(costly ? 1.0 : 0.0);
    }
    d.labels.push_back(active > options.signal_count / 2 ? 1 : 0);
  }
  d.validate();
  out.costs = CostVector(std::move(costs));
  return out;
}

struct RandomInstanceOptions {
  std::size_t min_features = 1;
  std::size_t max_features = 4;
  std::size_t min_examples = 2;
  std::size_t max_examples = 32;
  std::uint64_t max_integer_cost = 5;
  int num_classes = 2;
  std::vector<std::uint32_t> alphas = {0};  // threshold-pairs alpha, sampled uniformly
};

/// Draws a consistent random instance: binary feature rows, labels assigned
/// per distinct feature pattern (so duplicated rows agree on their label
/// for every alpha), integer costs in [1, max_integer_cost].
inline SmallInstance random_small_instance(Rng& rng, const RandomInstanceOptions& options = {}) {
  if (options.min_features < 1 || options.max_features < options.min_features ||
      options.max_features > SmallInstance::kMaxFeatures)
    throw InvalidArgument("random instance feature range is invalid");
  if (options.min_examples < 2 || options.max_examples < options.min_examples ||
      options.max_examples > SmallInstance::kMaxExamples)
    throw InvalidArgument("random instance example range is invalid");
  if (options.max_integer_cost < 1) throw InvalidArgument("max_integer_cost must be at least 1");
  if (options.num_classes < 2) throw InvalidArgument("instances need at least two classes");
  if (options.alphas.empty()) throw InvalidArgument("alphas must not be empty");

  SmallInstance instance;
  Dataset& d = instance.data;
  d.m = options.min_features + rng.uniform_index(options.max_features - options.min_features + 1);
  d.n = options.min_examples + rng.uniform_index(options.max_examples - options.min_examples + 1);
  d.num_classes = options.num_classes;
  std::unordered_map<std::uint32_t, int> pattern_labels;
  for (std::size_t r = 0; r < d.n; ++r) {
    std::uint32_t pattern = 0;
    for (std::size_t f = 0; f < d.m; ++f) {
      const bool one = rng.bernoulli(0.5);
      if (one) pattern |= (1u << f);
      d.values.push_back(one ? 1.0 : 0.0);
    }
    auto [it, inserted] = pattern_labels.try_emplace(pattern, 0);
    if (inserted) it->second = static_cast<int>(rng.uniform_index(
        static_cast<std::uint64_t>(options.num_classes)));
    d.labels.push_back(it->second);
  }
  std::vector<double> costs(d.m);
  for (double& c : costs) c = static_cast<double>(1 + rng.uniform_index(options.max_integer_cost));
  instance.costs = CostVector(std::move(costs));
  instance.spec = ImpuritySpec::threshold_pairs(
      options.alphas[rng.uniform_index(options.alphas.size())]);
  return instance;
}

}  // namespace budgetrf
