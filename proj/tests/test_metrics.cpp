#include "budgetrf/metrics.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "budgetrf/forest.hpp"
#include "budgetrf/oracle.hpp"
#include "budgetrf/random.hpp"
#include "support.hpp"

namespace budgetrf {
namespace {

using testsupport::make_dataset;

Tree leaf_tree(int label, ClassCounts counts) {
  Tree tree;
  TreeNode node;
  node.counts = std::move(counts);
  node.label = label;
  tree.nodes.push_back(std::move(node));
  return tree;
}

/// Root split on one feature; both children are leaves.
Tree stump_tree(int feature, double threshold, int left_label, int right_label, int num_classes) {
  Tree tree;
  TreeNode root;
  root.stump = Stump{feature, threshold};
  root.left = 1;
  root.right = 2;
  tree.nodes.push_back(root);
  ClassCounts left(static_cast<std::size_t>(num_classes), 0);
  left[static_cast<std::size_t>(left_label)] = 1;
  ClassCounts right(static_cast<std::size_t>(num_classes), 0);
  right[static_cast<std::size_t>(right_label)] = 1;
  tree.nodes.push_back(leaf_tree(left_label, left).nodes[0]);
  tree.nodes.push_back(leaf_tree(right_label, right).nodes[0]);
  return tree;
}

Forest forest_of(std::vector<Tree> trees, std::size_t m) {
  Forest f;
  f.trees = std::move(trees);
  f.costs = CostVector::uniform(m);
  return f;
}

TEST(TestError, PerfectStumpScoresZero) {
  const Dataset d = make_dataset({{0.0}, {1.0}, {0.0}, {1.0}}, {0, 1, 0, 1}, 2);
  const Forest f = forest_of({stump_tree(0, 0.5, 0, 1, 2)}, 1);
  EXPECT_DOUBLE_EQ(test_error(f, d), 0.0);
}

TEST(TestError, ConstantForestOnBalancedDataScoresHalf) {
  const Dataset d = make_dataset({{0.0}, {1.0}, {2.0}, {3.0}}, {0, 1, 0, 1}, 2);
  const Forest f = forest_of({leaf_tree(0, {4, 0})}, 1);
  EXPECT_DOUBLE_EQ(test_error(f, d), 0.5);
}

TEST(TestError, DepthTwoTreeOnSynthetic1024) {
  const Dataset data = gen_synthetic_1024();
  GrowConfig config;
  config.spec = ImpuritySpec::threshold_pairs(0);
  config.search = SplitSearch::Exhaustive;
  config.max_depth = 2;
  Rng rng(1);
  const GrowResult grown = grow(data, CostVector::uniform(data.m), config, rng);
  Forest f = forest_of({grown.tree}, data.m);
  EXPECT_DOUBLE_EQ(test_error(f, data), 4.0 / 1024.0);
}

TEST(TestError, MatchesPerExampleComparison) {
  Rng rng(derive_seed(828384, StreamTag::Instance, 0));
  Dataset d;
  d.n = 120;
  d.m = 3;
  d.num_classes = 3;
  for (std::size_t i = 0; i < d.n * d.m; ++i) d.values.push_back(rng.uniform_double(0.0, 1.0));
  for (std::size_t i = 0; i < d.n; ++i) d.labels.push_back(static_cast<int>(rng.uniform_index(3)));
  d.validate();

  BudgetConfig config;
  config.max_trees = 5;
  config.seed = 99;
  const ForestResult result =
      grow_forest(d, d, config, ImpuritySpec::threshold_pairs(0), CostVector::uniform(d.m));
  ASSERT_FALSE(result.forest.empty());

  std::size_t right = 0;
  for (std::size_t r = 0; r < d.n; ++r) {
    if (predict(result.forest, d.row(r)) == d.labels[r]) ++right;
  }
  const double accuracy = static_cast<double>(right) / static_cast<double>(d.n);
  EXPECT_DOUBLE_EQ(test_error(result.forest, d), 1.0 - accuracy);
}

TEST(TestError, NeedsNonEmptyForest) {
  const Dataset d = make_dataset({{0.0}, {1.0}}, {0, 1}, 2);
  EXPECT_THROW(test_error(Forest{}, d), InvalidArgument);
}

TEST(AvgFeatureFraction, LeafForestUsesNothing) {
  const Dataset d = make_dataset({{0.0, 1.0}, {1.0, 0.0}}, {0, 1}, 2);
  const Forest f = forest_of({leaf_tree(0, {2, 0})}, 2);
  EXPECT_DOUBLE_EQ(avg_feature_fraction(f, d), 0.0);
}

TEST(AvgFeatureFraction, EveryFeatureEverywhereIsOne) {
  const Dataset d = make_dataset({{0.0}, {1.0}}, {0, 1}, 2);
  const Forest f = forest_of({stump_tree(0, 0.5, 0, 1, 2)}, 1);
  EXPECT_DOUBLE_EQ(avg_feature_fraction(f, d), 1.0);
}

TEST(AvgFeatureFraction, CountsTheUnionOnce) {
  const Dataset d = make_dataset({{0.0, 0.0, 9.0, 9.0}, {1.0, 1.0, 9.0, 9.0}}, {0, 1}, 2);
  // Three trees over two distinct features; the union per example is 2 of 4.
  const Forest f = forest_of({stump_tree(0, 0.5, 0, 1, 2), stump_tree(1, 0.5, 0, 1, 2),
                              stump_tree(0, 0.5, 0, 1, 2)},
                             4);
  EXPECT_DOUBLE_EQ(avg_feature_fraction(f, d), 0.5);
}

QueryGroup group(std::vector<std::pair<int, double>> docs) {
  QueryGroup g;
  for (auto [relevance, confidence] : docs) g.documents.push_back({0, relevance, confidence});
  return g;
}

TEST(AveragePrecisionAt5, TopFiveAllRelevantScoresOne) {
  const auto g = group({{1, 0.9}, {1, 0.8}, {1, 0.7}, {1, 0.6}, {1, 0.5}, {0, 0.4}});
  EXPECT_DOUBLE_EQ(average_precision_at_5({g}), 1.0);
}

TEST(AveragePrecisionAt5, FirstUnrelatedAtPositionOneScoresZero) {
  const auto g = group({{0, 0.9}, {1, 0.8}, {1, 0.7}});
  EXPECT_DOUBLE_EQ(average_precision_at_5({g}), 0.0);
}

TEST(AveragePrecisionAt5, FirstUnrelatedAtPositionThreeScoresTwoFifths) {
  const auto g = group({{1, 0.9}, {1, 0.8}, {0, 0.7}, {1, 0.6}, {1, 0.5}});
  EXPECT_DOUBLE_EQ(average_precision_at_5({g}), 0.4);
}

TEST(AveragePrecisionAt5, ShortListsUseTheWholeList) {
  EXPECT_DOUBLE_EQ(average_precision_at_5({group({{1, 0.9}, {1, 0.8}})}), 1.0);
  EXPECT_DOUBLE_EQ(average_precision_at_5({group({{1, 0.9}, {0, 0.8}})}), 0.2);
}

TEST(AveragePrecisionAt5, SortIsByConfidenceNotInputOrder) {
  const auto g = group({{0, 0.5}, {1, 0.9}});
  EXPECT_DOUBLE_EQ(average_precision_at_5({g}), 0.2);
}

TEST(AveragePrecisionAt5, ConfidenceTiesKeepOriginalOrder) {
  EXPECT_DOUBLE_EQ(average_precision_at_5({group({{0, 0.5}, {1, 0.5}})}), 0.0);
  EXPECT_DOUBLE_EQ(average_precision_at_5({group({{1, 0.5}, {0, 0.5}})}), 0.2);
}

TEST(AveragePrecisionAt5, MeansOverQueries) {
  const auto perfect = group({{1, 0.9}});
  const auto partial = group({{1, 0.9}, {1, 0.8}, {0, 0.7}});
  EXPECT_DOUBLE_EQ(average_precision_at_5({perfect, partial}), (1.0 + 0.4) / 2.0);
}

TEST(AveragePrecisionAt5, InvariantUnderMonotoneConfidenceTransforms) {
  Rng rng(derive_seed(858687, StreamTag::Instance, 0));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<QueryGroup> groups;
    const std::size_t queries = 1 + rng.uniform_index(4);
    for (std::size_t q = 0; q < queries; ++q) {
      QueryGroup g;
      const std::size_t docs = 1 + rng.uniform_index(8);
      for (std::size_t i = 0; i < docs; ++i) {
        g.documents.push_back(
            {i, rng.bernoulli(0.7) ? 1 : 0, rng.uniform_double(-2.0, 2.0)});
      }
      groups.push_back(std::move(g));
    }
    std::vector<QueryGroup> transformed = groups;
    for (auto& g : transformed) {
      for (auto& doc : g.documents) doc.confidence = std::exp(doc.confidence) + 3.0;
    }
    EXPECT_DOUBLE_EQ(average_precision_at_5(groups), average_precision_at_5(transformed));
  }
}

TEST(AveragePrecisionAt5, ValidatesItsInput) {
  EXPECT_THROW(average_precision_at_5({}), InvalidArgument);
  EXPECT_THROW(average_precision_at_5({QueryGroup{}}), InvalidArgument);
  EXPECT_THROW(average_precision_at_5({group({{2, 0.5}})}), InvalidArgument);
}

TEST(DefaultAlphaPreset, MatchesTheStandardGrid) {
  EXPECT_EQ(default_alpha_preset(),
            (std::vector<Count>{0, 2, 4, 6, 8, 10, 15, 25, 35, 45}));
}

/// Labels follow feature 0 with some noise in the other features, so grown
/// trees are non-trivial but learnable.
Dataset learnable_dataset(std::uint64_t seed, std::size_t n) {
  Rng rng(derive_seed(seed, StreamTag::Instance, 0));
  Dataset d;
  d.n = n;
  d.m = 4;
  d.num_classes = 2;
  for (std::size_t r = 0; r < n; ++r) {
    const double signal = rng.uniform_double(0.0, 1.0);
    d.values.push_back(signal);
    for (std::size_t j = 1; j < d.m; ++j) d.values.push_back(rng.uniform_double(0.0, 1.0));
    d.labels.push_back(signal > 0.5 ? 1 : 0);
  }
  d.validate();
  return d;
}

TEST(SweepAlpha, SingleAlphaSingleTree) {
  const Dataset train = learnable_dataset(1000, 80);
  const Dataset validation = learnable_dataset(1001, 40);
  const Dataset test = learnable_dataset(1002, 40);
  SweepOptions options;
  options.alphas = {0};
  options.config.max_trees = 1;
  options.config.seed = 5;
  const CostVector costs({1.0, 2.0, 3.0, 4.0});
  const SweepResult result = sweep_alpha(train, validation, test, options, costs);
  ASSERT_EQ(result.points.size(), 1u);
  EXPECT_EQ(result.points[0].alpha, 0u);
  EXPECT_EQ(result.points[0].trees, 1u);
  EXPECT_TRUE(result.infeasible_alphas.empty());
}

TEST(SweepAlpha, PrefixRowsMatchIndependentEvaluation) {
  const Dataset train = learnable_dataset(1100, 100);
  const Dataset validation = learnable_dataset(1101, 50);
  const Dataset test = learnable_dataset(1102, 50);
  SweepOptions options;
  options.alphas = {0, 8};
  options.config.max_trees = 4;
  options.config.seed = 21;
  const CostVector costs = CostVector::uniform(train.m);  // unit costs keep sums exact
  const SweepResult result = sweep_alpha(train, validation, test, options, costs);
  ASSERT_EQ(result.points.size(), 8u);

  for (std::size_t ai = 0; ai < options.alphas.size(); ++ai) {
    BudgetConfig cfg = options.config;
    cfg.seed = derive_seed(derive_seed(options.config.seed, StreamTag::Alpha, ai),
                           StreamTag::Repeat, 0);
    const ForestResult run = grow_forest(train, validation, cfg,
                                         ImpuritySpec::threshold_pairs(options.alphas[ai]), costs);
    ASSERT_EQ(run.forest.size(), 4u);
    for (std::size_t j = 1; j <= 4; ++j) {
      Forest prefix = run.forest;
      prefix.trees.resize(j);
      const CurvePoint& point = result.points[ai * 4 + (j - 1)];
      EXPECT_EQ(point.alpha, options.alphas[ai]);
      EXPECT_EQ(point.trees, j);
      EXPECT_DOUBLE_EQ(point.avg_cost, average_cost(prefix, test, costs));
      EXPECT_DOUBLE_EQ(point.error, test_error(prefix, test));
      EXPECT_DOUBLE_EQ(point.avg_cost_std, 0.0);
      EXPECT_DOUBLE_EQ(point.error_std, 0.0);
    }
  }
}

TEST(SweepAlpha, CostIsNonDecreasingAlongEachPrefix) {
  const Dataset train = learnable_dataset(1200, 90);
  const Dataset validation = learnable_dataset(1201, 45);
  const Dataset test = learnable_dataset(1202, 45);
  SweepOptions options;
  options.alphas = {0, 2, 8};
  options.config.max_trees = 5;
  options.config.seed = 33;
  const CostVector costs({1.0, 0.5, 2.0, 1.5});
  const SweepResult result = sweep_alpha(train, validation, test, options, costs);
  ASSERT_EQ(result.points.size(), 15u);
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    if (result.points[i].trees == 1) continue;
    EXPECT_EQ(result.points[i].alpha, result.points[i - 1].alpha);
    EXPECT_GE(result.points[i].avg_cost, result.points[i - 1].avg_cost);
  }
}

TEST(SweepAlpha, IsDeterministic) {
  const Dataset train = learnable_dataset(1300, 60);
  const Dataset validation = learnable_dataset(1301, 30);
  const Dataset test = learnable_dataset(1302, 30);
  SweepOptions options;
  options.alphas = {0, 8};
  options.config.max_trees = 3;
  options.config.seed = 44;
  const CostVector costs = CostVector::uniform(train.m);
  const SweepResult a = sweep_alpha(train, validation, test, options, costs);
  const SweepResult b = sweep_alpha(train, validation, test, options, costs);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].alpha, b.points[i].alpha);
    EXPECT_EQ(a.points[i].trees, b.points[i].trees);
    EXPECT_DOUBLE_EQ(a.points[i].avg_cost, b.points[i].avg_cost);
    EXPECT_DOUBLE_EQ(a.points[i].error, b.points[i].error);
  }
}

/// Pure label noise: trees memorize their bootstrap draw, so repeats with
/// different seeds measure differently on held-out data.
Dataset noise_dataset(std::uint64_t seed, std::size_t n) {
  Rng rng(derive_seed(seed, StreamTag::Instance, 0));
  Dataset d;
  d.n = n;
  d.m = 4;
  d.num_classes = 2;
  for (std::size_t i = 0; i < n * d.m; ++i) d.values.push_back(rng.uniform_double(0.0, 1.0));
  for (std::size_t i = 0; i < n; ++i) d.labels.push_back(static_cast<int>(rng.uniform_index(2)));
  d.validate();
  return d;
}

TEST(SweepAlpha, RepeatsYieldSpreadAndMeans) {
  const Dataset train = noise_dataset(1400, 70);
  const Dataset validation = noise_dataset(1401, 35);
  const Dataset test = noise_dataset(1402, 35);
  SweepOptions options;
  options.alphas = {0};
  options.repeats = 3;
  options.config.max_trees = 3;
  options.config.seed = 55;
  const CostVector costs({1.0, 2.0, 3.0, 4.0});
  const SweepResult result = sweep_alpha(train, validation, test, options, costs);
  ASSERT_EQ(result.points.size(), 3u);
  double spread = 0.0;
  for (const CurvePoint& p : result.points) {
    EXPECT_GE(p.avg_cost_std, 0.0);
    EXPECT_GE(p.error_std, 0.0);
    spread += p.avg_cost_std + p.error_std;
  }
  EXPECT_GT(spread, 0.0);  // bootstrap draws differ across repeats
}

TEST(SweepAlpha, BudgetInfeasibleAlphasAreRecordedNotFatal) {
  const Dataset train = learnable_dataset(1500, 60);
  const Dataset validation = learnable_dataset(1501, 30);
  const Dataset test = learnable_dataset(1502, 30);
  SweepOptions options;
  options.alphas = {0, 8};
  options.config.max_trees = 2;
  options.config.seed = 66;
  options.config.budget = 0.0;  // nothing fits
  const CostVector costs = CostVector::uniform(train.m);
  const SweepResult result = sweep_alpha(train, validation, test, options, costs);
  EXPECT_TRUE(result.points.empty());
  EXPECT_EQ(result.infeasible_alphas, (std::vector<Count>{0, 8}));
}

TEST(SweepAlpha, RecommendsTheLowestValidationError) {
  const Dataset train = learnable_dataset(1600, 100);
  const Dataset validation = learnable_dataset(1601, 50);
  SweepOptions options;
  options.alphas = {0, 8};
  options.config.max_trees = 4;
  options.config.seed = 77;
  // One tree can touch at most all m = 4 unit-cost features, so both budget
  // levels always have at least the single-tree prefix as a candidate.
  options.budgets = {4.0, 100.0};
  const CostVector costs = CostVector::uniform(train.m);
  // Validation doubles as the test set, so curve points carry the same
  // numbers the recommendation logic saw.
  const SweepResult result = sweep_alpha(train, validation, validation, options, costs);
  ASSERT_FALSE(result.points.empty());
  ASSERT_EQ(result.recommendations.size(), 2u);
  for (const AlphaRecommendation& rec : result.recommendations) {
    EXPECT_LE(rec.validation_cost, rec.budget);
    double best = 1.0;
    for (const CurvePoint& p : result.points) {
      if (p.avg_cost <= rec.budget) best = std::min(best, p.error);
    }
    EXPECT_DOUBLE_EQ(rec.validation_error, best);
  }
}

TEST(WriteCurveCsv, EmitsOneRowPerPointWithEmptyMetricCells) {
  std::vector<CurvePoint> points(2);
  points[0] = {0, 1, 1.5, 0.0, 0.25, 0.0, std::nullopt, std::nullopt};
  points[1] = {8, 2, 2.5, 0.125, 0.5, 0.0625, 0.75, 0.0};
  std::ostringstream out;
  write_curve_csv(out, points);
  EXPECT_EQ(out.str(),
            "alpha,trees,avg_cost,avg_cost_std,error,error_std,metric,metric_std\n"
            "0,1,1.5,0,0.25,0,,\n"
            "8,2,2.5,0.125,0.5,0.0625,0.75,0\n");
}

}  // namespace
}  // namespace budgetrf
