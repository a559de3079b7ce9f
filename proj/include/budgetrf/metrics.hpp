#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "budgetrf/dataset.hpp"
#include "budgetrf/detail/text.hpp"
#include "budgetrf/errors.hpp"
#include "budgetrf/forest.hpp"
#include "budgetrf/random.hpp"

namespace budgetrf {

/// Fraction of test examples whose majority-vote prediction differs from the
/// label.
inline double test_error(const Forest& forest, const Dataset& test) {
  test.validate();
  if (forest.empty()) throw InvalidArgument("test_error needs a non-empty forest");
  std::size_t wrong = 0;
  for (std::size_t r = 0; r < test.n; ++r) {
    if (predict(forest, test.row(r)) != test.labels[r]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test.n);
}

/// Mean over test examples of the fraction of features acquired, counting a
/// feature once however many trees read it.
inline double avg_feature_fraction(const Forest& forest, const Dataset& test) {
  test.validate();
  if (forest.empty()) throw InvalidArgument("avg_feature_fraction needs a non-empty forest");
  std::size_t acquired_total = 0;
  std::vector<std::uint8_t> acquired(test.m);
  for (std::size_t r = 0; r < test.n; ++r) {
    std::fill(acquired.begin(), acquired.end(), 0);
    for (const Tree& tree : forest.trees) route(tree, test.row(r), acquired);
    acquired_total += static_cast<std::size_t>(
        std::count(acquired.begin(), acquired.end(), std::uint8_t{1}));
  }
  return static_cast<double>(acquired_total) /
         (static_cast<double>(test.n) * static_cast<double>(test.m));
}

/// One scored document of a ranking query.
struct QueryDocument {
  std::size_t example = 0;  // row in the source dataset; not used by the metric
  int relevance = 0;        // 1 relevant, 0 not
  double confidence = 0.0;
};

/// All documents retrieved for one query.
struct QueryGroup {
  std::string id;
  std::vector<QueryDocument> documents;
};

/// Average Precision at 5. Per query, documents are ranked by decreasing
/// confidence (stable, so ties keep their original order). A query scores 1
/// when the whole top five (or the whole list, if shorter) is relevant, and
/// (j-1)/5 when the first non-relevant document sits at 1-based position j.
/// Only the ranking matters, so any strictly increasing transformation of
/// the confidences leaves the score unchanged.
inline double average_precision_at_5(const std::vector<QueryGroup>& groups) {
  if (groups.empty()) throw InvalidArgument("average_precision_at_5 needs at least one query");
  double total = 0.0;
  std::vector<std::size_t> order;
  for (const QueryGroup& group : groups) {
    if (group.documents.empty())
      throw InvalidArgument("query '" + group.id + "' has no documents");
    for (const QueryDocument& doc : group.documents) {
      if (doc.relevance != 0 && doc.relevance != 1)
        throw InvalidArgument("relevance labels must be 0 or 1");
    }
    order.resize(group.documents.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return group.documents[a].confidence > group.documents[b].confidence;
    });
    const std::size_t depth = std::min<std::size_t>(5, order.size());
    double score = 1.0;
    for (std::size_t i = 0; i < depth; ++i) {
      if (group.documents[order[i]].relevance == 0) {
        score = static_cast<double>(i) / 5.0;
        break;
      }
    }
    total += score;
  }
  return total / static_cast<double>(groups.size());
}

/// One row of an accuracy-cost curve: the first `trees` trees of the forest
/// grown at `alpha`, measured on the test set. With repeated runs the values
/// are means and the _std fields population standard deviations; a single
/// run leaves every _std at 0.
struct CurvePoint {
  Count alpha = 0;
  std::size_t trees = 0;
  double avg_cost = 0.0;
  double avg_cost_std = 0.0;
  double error = 0.0;
  double error_std = 0.0;
  std::optional<double> metric;  // AP@5 where query structure exists
  std::optional<double> metric_std;
};

/// The paper's sweep grid for the threshold-Pairs parameter.
inline std::vector<Count> default_alpha_preset() { return {0, 2, 4, 6, 8, 10, 15, 25, 35, 45}; }

struct SweepOptions {
  std::vector<Count> alphas = default_alpha_preset();
  std::size_t repeats = 1;
  std::vector<double> budgets;  // budget levels to recommend an alpha for
  BudgetConfig config;          // seed is the master seed; budget usually infinite
};

/// The alpha whose best prefix stays within `budget` on validation data with
/// the lowest validation error.
struct AlphaRecommendation {
  double budget = 0.0;
  Count alpha = 0;
  std::size_t trees = 0;
  double validation_error = 0.0;
  double validation_cost = 0.0;
};

struct SweepResult {
  std::vector<CurvePoint> points;
  std::vector<AlphaRecommendation> recommendations;
  std::vector<Count> infeasible_alphas;  // alphas whose training hit the budget before tree 1
};

namespace detail {

/// Test-set measurements for every prefix of one grown forest: entry j-1
/// holds the first j trees. Votes and the acquired-feature mask are carried
/// across prefixes, so the whole curve costs one routing pass per tree.
struct PrefixCurve {
  std::vector<double> avg_cost;
  std::vector<double> error;
};

inline PrefixCurve prefix_curve(const Forest& forest, const Dataset& eval,
                                const CostVector& costs) {
  PrefixCurve curve;
  const std::size_t n = eval.n;
  std::vector<std::uint8_t> acquired(n * eval.m, 0);
  std::vector<std::uint32_t> votes(n * static_cast<std::size_t>(eval.num_classes), 0);
  double total_cost = 0.0;
  std::vector<std::uint8_t> mask(eval.m);
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < n; ++r) {
      std::fill(mask.begin(), mask.end(), 0);
      const TreeNode& leaf = route(forest.trees[t], eval.row(r), mask);
      for (std::size_t f = 0; f < eval.m; ++f) {
        if (mask[f] && !acquired[r * eval.m + f]) {
          acquired[r * eval.m + f] = 1;
          total_cost += costs[f];
        }
      }
      // Same vote rule as predict(): argmax with ties to the lowest class.
      auto* vote_row = votes.data() + r * static_cast<std::size_t>(eval.num_classes);
      ++vote_row[static_cast<std::size_t>(leaf.label)];
      int best = 0;
      for (int c = 1; c < eval.num_classes; ++c) {
        if (vote_row[c] > vote_row[best]) best = c;
      }
      if (best != eval.labels[r]) ++wrong;
    }
    curve.avg_cost.push_back(total_cost / static_cast<double>(n));
    curve.error.push_back(static_cast<double>(wrong) / static_cast<double>(n));
  }
  return curve;
}

inline double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double population_stddev(const std::vector<double>& xs, double mean) {
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return std::sqrt(sq / static_cast<double>(xs.size()));
}

}  // namespace detail

/// Grows one forest per (alpha, repeat) pair and reports the accuracy-cost
/// curve over tree-count prefixes, averaged over repeats. Every run draws its
/// seed from the master seed by alpha index and repeat index, so the sweep is
/// reproducible run to run and alpha by alpha. An alpha for which any repeat
/// is budget-infeasible contributes no points and is listed in
/// infeasible_alphas instead; with a budget set, prefixes are reported up to
/// the shortest forest across that alpha's repeats so each row averages every
/// repeat. Recommendations pick, per requested budget level, the (alpha,
/// trees) pair whose mean validation cost fits the budget with the lowest
/// mean validation error, breaking ties toward lower alpha, then fewer trees.
inline SweepResult sweep_alpha(const Dataset& train, const Dataset& validation,
                               const Dataset& test, const SweepOptions& options,
                               const CostVector& costs) {
  if (options.alphas.empty()) throw InvalidArgument("sweep needs at least one alpha");
  if (options.repeats < 1) throw InvalidArgument("sweep needs at least one repeat");
  SweepResult result;

  struct AlphaCurve {
    Count alpha = 0;
    std::vector<CurvePoint> points;             // test-side, averaged over repeats
    std::vector<double> validation_cost_mean;   // entry j-1: first j trees
    std::vector<double> validation_error_mean;
  };
  std::vector<AlphaCurve> curves;

  for (std::size_t ai = 0; ai < options.alphas.size(); ++ai) {
    const Count alpha = options.alphas[ai];
    const std::uint64_t alpha_seed = derive_seed(options.config.seed, StreamTag::Alpha, ai);

    std::vector<detail::PrefixCurve> test_curves;
    std::vector<detail::PrefixCurve> val_curves;
    bool infeasible = false;
    std::size_t shared_trees = options.config.max_trees;
    for (std::size_t rep = 0; rep < options.repeats; ++rep) {
      BudgetConfig cfg = options.config;
      cfg.seed = derive_seed(alpha_seed, StreamTag::Repeat, rep);
      const ForestResult run =
          grow_forest(train, validation, cfg, ImpuritySpec::threshold_pairs(alpha), costs);
      if (run.status == ForestStatus::BudgetInfeasible) {
        infeasible = true;
        break;
      }
      test_curves.push_back(detail::prefix_curve(run.forest, test, costs));
      val_curves.push_back(detail::prefix_curve(run.forest, validation, costs));
      shared_trees = std::min(shared_trees, run.forest.size());
    }
    if (infeasible) {
      result.infeasible_alphas.push_back(alpha);
      continue;
    }

    AlphaCurve curve;
    curve.alpha = alpha;
    std::vector<double> sample(options.repeats);
    for (std::size_t j = 0; j < shared_trees; ++j) {
      CurvePoint point;
      point.alpha = alpha;
      point.trees = j + 1;
      for (std::size_t rep = 0; rep < options.repeats; ++rep) sample[rep] = test_curves[rep].avg_cost[j];
      point.avg_cost = detail::mean_of(sample);
      point.avg_cost_std = detail::population_stddev(sample, point.avg_cost);
      for (std::size_t rep = 0; rep < options.repeats; ++rep) sample[rep] = test_curves[rep].error[j];
      point.error = detail::mean_of(sample);
      point.error_std = detail::population_stddev(sample, point.error);
      curve.points.push_back(point);

      for (std::size_t rep = 0; rep < options.repeats; ++rep) sample[rep] = val_curves[rep].avg_cost[j];
      curve.validation_cost_mean.push_back(detail::mean_of(sample));
      for (std::size_t rep = 0; rep < options.repeats; ++rep) sample[rep] = val_curves[rep].error[j];
      curve.validation_error_mean.push_back(detail::mean_of(sample));
    }
    curves.push_back(std::move(curve));
  }

  for (const AlphaCurve& curve : curves) {
    result.points.insert(result.points.end(), curve.points.begin(), curve.points.end());
  }

  for (double budget : options.budgets) {
    bool found = false;
    AlphaRecommendation best;
    for (const AlphaCurve& curve : curves) {
      for (std::size_t j = 0; j < curve.points.size(); ++j) {
        if (curve.validation_cost_mean[j] > budget) continue;
        const double err = curve.validation_error_mean[j];
        if (!found || err < best.validation_error) {
          found = true;
          best = {budget, curve.alpha, j + 1, err, curve.validation_cost_mean[j]};
        }
      }
    }
    if (found) result.recommendations.push_back(best);
  }
  return result;
}

/// Curve CSV: one row per (alpha, prefix) point, stddev columns zero when
/// repeats == 1, metric columns empty when no ranking metric applies.
inline void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& points) {
  out << "alpha,trees,avg_cost,avg_cost_std,error,error_std,metric,metric_std\n";
  for (const CurvePoint& p : points) {
    out << p.alpha << ',' << p.trees << ',' << detail::format_double(p.avg_cost) << ','
        << detail::format_double(p.avg_cost_std) << ',' << detail::format_double(p.error) << ','
        << detail::format_double(p.error_std) << ',';
    if (p.metric) out << detail::format_double(*p.metric);
    out << ',';
    if (p.metric_std) out << detail::format_double(*p.metric_std);
    out << '\n';
  }
}

}  // namespace budgetrf
