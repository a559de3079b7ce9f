#include <cstdint>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "budgetrf/errors.hpp"
#include "budgetrf/impurity.hpp"
#include "budgetrf/random.hpp"
#include "support.hpp"

namespace budgetrf {
namespace {

TEST(ThresholdPairs, WorkedValues) {
  EXPECT_EQ(eval_threshold_pairs({30, 30}, 0), 900u);
  EXPECT_EQ(eval_threshold_pairs({30, 10}, 0), 300u);
  EXPECT_EQ(eval_threshold_pairs({30, 30}, 8), 484u);
  EXPECT_EQ(eval_threshold_pairs({30, 10}, 8), 44u);
  EXPECT_EQ(eval_threshold_pairs({15, 15}, 8), 49u);
  EXPECT_EQ(eval_threshold_pairs({2, 3, 4}, 0), 26u);
}

TEST(ThresholdPairs, PureSetIsZeroForAnyAlpha) {
  for (std::uint32_t alpha : {0u, 1u, 8u, 45u}) {
    EXPECT_EQ(eval_threshold_pairs({60, 0}, alpha), 0u);
    EXPECT_EQ(eval_threshold_pairs({0, 0, 7}, alpha), 0u);
  }
}

TEST(ThresholdPairs, ZeroExactlyWhenAtMostOneClassExceedsAlpha) {
  EXPECT_EQ(eval_threshold_pairs({8, 8}, 8), 0u);
  EXPECT_EQ(eval_threshold_pairs({100, 8}, 8), 0u);
  EXPECT_EQ(eval_threshold_pairs({9, 9}, 8), 1u);
  EXPECT_EQ(eval_threshold_pairs({8, 8, 8}, 8), 0u);
}

TEST(ThresholdPairs, OverflowThrows) {
  EXPECT_THROW(eval_threshold_pairs({1ull << 33, 1ull << 33}, 0), OverflowError);
}

TEST(Powers, WorkedValues) {
  EXPECT_EQ(eval_powers({2, 3}, 2), 12u);
  EXPECT_EQ(eval_powers({1, 1, 1}, 2), 6u);
  for (std::uint32_t l : {2u, 3u, 4u, 5u}) EXPECT_EQ(eval_powers({5, 0}, l), 0u);
}

TEST(Powers, OverflowThrows) {
  EXPECT_THROW(eval_powers({1ull << 32, 2}, 2), OverflowError);
  EXPECT_THROW(eval_powers({1ull << 22, 1}, 3), OverflowError);
}

TEST(Polynomial, WorkedValues) {
  const std::vector<PolynomialTerm> product{{1, {1, 1}}};
  EXPECT_EQ(eval_polynomial({2, 3}, product), 6u);
  EXPECT_EQ(eval_polynomial({0, 7}, product), 0u);
  const std::vector<PolynomialTerm> triple{{2, {1, 1, 1}}};
  EXPECT_EQ(eval_polynomial({2, 2, 2}, triple), 16u);
}

TEST(Polynomial, ArityMustMatchCounts) {
  const std::vector<PolynomialTerm> triple{{2, {1, 1, 1}}};
  EXPECT_THROW(eval_polynomial({2, 2}, triple), InvalidArgument);
}

TEST(ImpuritySpec, FactoriesValidate) {
  EXPECT_EQ(ImpuritySpec::threshold_pairs(8).alpha(), 8u);
  EXPECT_EQ(ImpuritySpec::powers(3).power(), 3u);
  EXPECT_THROW(ImpuritySpec::powers(1), InvalidArgument);
  EXPECT_THROW(ImpuritySpec::powers(0), InvalidArgument);
  EXPECT_THROW(ImpuritySpec::polynomial({}), InvalidArgument);
  EXPECT_THROW(ImpuritySpec::polynomial({{1, {2, 0}}}), InvalidArgument);
  EXPECT_NO_THROW(ImpuritySpec::polynomial({{1, {2, 1}}}));
}

TEST(Impurity, DispatchMatchesFamilies) {
  EXPECT_EQ(impurity(ImpuritySpec::threshold_pairs(0), {30, 30}), 900u);
  EXPECT_EQ(impurity(ImpuritySpec::powers(2), {2, 3}), 12u);
  EXPECT_EQ(impurity(ImpuritySpec::threshold_pairs(8), {30, 10}), 44u);
}

// With alpha=0 the pair sum is half of the Powers l=2 value on every count
// vector: (sum n_i)^2 - sum n_i^2 = 2 * sum_{i<j} n_i n_j.
TEST(ThresholdPairs, AlphaZeroIsHalfOfPowersTwo) {
  std::vector<Count> counts;
  const auto check_all = [&](auto&& self, std::size_t k, Count remaining) -> void {
    if (counts.size() == k) {
      EXPECT_EQ(2 * eval_threshold_pairs(counts, 0), eval_powers(counts, 2));
      return;
    }
    for (Count c = 0; c <= remaining; ++c) {
      counts.push_back(c);
      self(self, k, remaining - c);
      counts.pop_back();
    }
  };
  for (std::size_t k = 1; k <= 4; ++k) check_all(check_all, k, 30);
}

struct SpecCase {
  ImpuritySpec spec;
  std::size_t arity;  // 0 means any
};

std::vector<SpecCase> admissible_specs(Rng& rng) {
  std::vector<SpecCase> cases;
  for (std::uint32_t alpha : {0u, 1u, 2u, 8u, 45u})
    cases.push_back({ImpuritySpec::threshold_pairs(alpha), 0});
  for (std::uint32_t l : {2u, 3u, 4u, 5u}) cases.push_back({ImpuritySpec::powers(l), 0});
  for (std::size_t arity = 2; arity <= 6; ++arity)
    cases.push_back({testsupport::random_polynomial_spec(rng, arity), arity});
  return cases;
}

std::size_t case_arity(const SpecCase& c, Rng& rng) {
  return c.arity != 0 ? c.arity : 2 + rng.uniform_index(5);
}

TEST(Admissibility, Purity) {
  Rng rng(derive_seed(404142, StreamTag::Repeat, 0));
  for (const SpecCase& c : admissible_specs(rng)) {
    for (int iter = 0; iter < 1000; ++iter) {
      const std::size_t k = case_arity(c, rng);
      ClassCounts counts(k, 0);
      counts[rng.uniform_index(k)] = 1 + rng.uniform_index(200);
      EXPECT_EQ(impurity(c.spec, counts), 0u);
    }
  }
}

TEST(Admissibility, Monotonicity) {
  Rng rng(derive_seed(404142, StreamTag::Repeat, 1));
  for (const SpecCase& c : admissible_specs(rng)) {
    std::size_t violations = 0;
    for (int iter = 0; iter < 10000; ++iter) {
      const std::size_t k = case_arity(c, rng);
      const ClassCounts upper = testsupport::random_counts(rng, k, 200);
      ClassCounts lower(k);
      for (std::size_t i = 0; i < k; ++i) lower[i] = rng.uniform_index(upper[i] + 1);
      if (impurity(c.spec, lower) > impurity(c.spec, upper)) violations++;
    }
    EXPECT_EQ(violations, 0u);
  }
}

// Adding one example of class j to a superset raises the impurity by at
// least as much as adding it to any subset.
TEST(Admissibility, Supermodularity) {
  Rng rng(derive_seed(404142, StreamTag::Repeat, 2));
  for (const SpecCase& c : admissible_specs(rng)) {
    std::size_t violations = 0;
    for (int iter = 0; iter < 10000; ++iter) {
      const std::size_t k = case_arity(c, rng);
      const ClassCounts big = testsupport::random_counts(rng, k, 200);
      ClassCounts small(k);
      for (std::size_t i = 0; i < k; ++i) small[i] = rng.uniform_index(big[i] + 1);
      const std::size_t j = rng.uniform_index(k);
      ClassCounts big_plus = big;
      big_plus[j]++;
      ClassCounts small_plus = small;
      small_plus[j]++;
      const ImpurityValue big_gain = impurity(c.spec, big_plus) - impurity(c.spec, big);
      const ImpurityValue small_gain = impurity(c.spec, small_plus) - impurity(c.spec, small);
      if (big_gain < small_gain) violations++;
    }
    EXPECT_EQ(violations, 0u);
  }
}

}  // namespace
}  // namespace budgetrf
