#pragma once

// Helpers shared by the test binaries: dataset literals and random
// generators for the property suites.

#include <cstdint>
#include <utility>
#include <vector>

#include "budgetrf/dataset.hpp"
#include "budgetrf/impurity.hpp"
#include "budgetrf/random.hpp"

namespace budgetrf::testsupport {

inline Dataset make_dataset(std::vector<std::vector<double>> rows, std::vector<int> labels,
                            int num_classes) {
  Dataset d;
  d.n = rows.size();
  d.m = rows.empty() ? 0 : rows[0].size();
  for (const auto& r : rows) d.values.insert(d.values.end(), r.begin(), r.end());
  d.labels = std::move(labels);
  d.num_classes = num_classes;
  d.validate();
  return d;
}

inline ClassCounts random_counts(Rng& rng, std::size_t k, Count max_count) {
  ClassCounts counts(k);
  for (auto& c : counts) c = rng.uniform_index(max_count + 1);
  return counts;
}

/// Valid polynomial impurity of the given arity (>= 2): one to three terms,
/// each over two distinct classes, exponents at most 2. Values stay far
/// from 64-bit overflow for counts up to a few hundred.
inline ImpuritySpec random_polynomial_spec(Rng& rng, std::size_t arity) {
  std::vector<PolynomialTerm> terms(1 + rng.uniform_index(3));
  for (auto& term : terms) {
    term.coefficient = 1 + rng.uniform_index(3);
    term.exponents.assign(arity, 0);
    const std::size_t a = rng.uniform_index(arity);
    std::size_t b = rng.uniform_index(arity - 1);
    if (b >= a) b++;
    term.exponents[a] = 1;
    term.exponents[b] = 1;
    if (rng.bernoulli(0.5)) term.exponents[rng.bernoulli(0.5) ? a : b] = 2;
  }
  return ImpuritySpec::polynomial(terms);
}

}  // namespace budgetrf::testsupport
