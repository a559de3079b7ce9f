#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "budgetrf/errors.hpp"

namespace budgetrf {

using Count = std::uint64_t;

/// Number of examples of each class in a set. Entry i is the count for
/// class id i; the set size is the sum of entries.
using ClassCounts = std::vector<Count>;

/// Impurity values are exact unsigned integers. All supported impurity
/// families are integer-valued, which keeps risk comparisons free of
/// floating-point ties.
using ImpurityValue = std::uint64_t;

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("impurity value overflows 64 bits");
  return r;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("impurity value overflows 64 bits");
  return r;
}

inline std::uint64_t checked_pow(std::uint64_t base, std::uint32_t exp) {
  std::uint64_t r = 1;
  while (exp > 0) {
    if (exp & 1u) r = checked_mul(r, base);
    exp >>= 1u;
    if (exp > 0) base = checked_mul(base, base);
  }
  return r;
}

}  // namespace detail

/// One monomial of a polynomial impurity function: coefficient times a
/// product of class counts raised to per-class exponents.
struct PolynomialTerm {
  std::uint64_t coefficient = 0;
  std::vector<std::uint32_t> exponents;  // one entry per class

  bool operator==(const PolynomialTerm&) const = default;
};

enum class ImpurityKind { ThresholdPairs, Powers, Polynomial };

/// Selects and parameterizes one member of the supported impurity family.
/// All members are admissible: non-negative, zero on single-class sets,
/// monotone, and supermodular in the example set. (Their logarithmic-growth
/// property is an asymptotic statement about the family and is documented
/// rather than checked at runtime.)
class ImpuritySpec {
 public:
  static ImpuritySpec threshold_pairs(Count alpha) {
    ImpuritySpec s;
    s.kind_ = ImpurityKind::ThresholdPairs;
    s.alpha_ = alpha;
    return s;
  }

  static ImpuritySpec powers(std::uint32_t l) {
    if (l < 2) throw InvalidArgument("powers impurity requires exponent l >= 2");
    ImpuritySpec s;
    s.kind_ = ImpurityKind::Powers;
    s.power_ = l;
    return s;
  }

  static ImpuritySpec polynomial(std::vector<PolynomialTerm> terms) {
    if (terms.empty()) throw InvalidArgument("polynomial impurity requires at least one term");
    for (const auto& t : terms) {
      std::size_t nonzero = 0;
      for (auto e : t.exponents)
        if (e > 0) ++nonzero;
      if (nonzero < 2)
        throw InvalidArgument("each polynomial term needs at least two classes with nonzero exponent");
    }
    ImpuritySpec s;
    s.kind_ = ImpurityKind::Polynomial;
    s.terms_ = std::move(terms);
    return s;
  }

  ImpurityKind kind() const { return kind_; }
  Count alpha() const { return alpha_; }
  std::uint32_t power() const { return power_; }
  const std::vector<PolynomialTerm>& terms() const { return terms_; }

  bool operator==(const ImpuritySpec&) const = default;

 private:
  ImpurityKind kind_ = ImpurityKind::ThresholdPairs;
  Count alpha_ = 0;
  std::uint32_t power_ = 2;
  std::vector<PolynomialTerm> terms_;
};

/// Threshold-pairs impurity: the sum over unordered class pairs {i, j} of
/// the product of alpha-clamped counts, max(n_i - alpha, 0) * max(n_j - alpha, 0).
/// Zero exactly when at most one class has more than alpha examples, so
/// alpha sets how impure a leaf is allowed to stay.
inline ImpurityValue eval_threshold_pairs(const ClassCounts& counts, Count alpha) {
  std::uint64_t total = 0;
  const std::size_t k = counts.size();
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const std::uint64_t a = counts[i] > alpha ? counts[i] - alpha : 0;
    if (a == 0) continue;
    for (std::size_t j = i + 1; j < k; ++j) {
      const std::uint64_t b = counts[j] > alpha ? counts[j] - alpha : 0;
      if (b == 0) continue;
      total = detail::checked_add(total, detail::checked_mul(a, b));
    }
  }
  return total;
}

/// Powers impurity: (sum of counts)^l minus the sum of counts^l, l >= 2.
inline ImpurityValue eval_powers(const ClassCounts& counts, std::uint32_t l) {
  if (l < 2) throw InvalidArgument("powers impurity requires exponent l >= 2");
  std::uint64_t sum = 0;
  std::uint64_t sum_of_powers = 0;
  for (Count c : counts) {
    sum = detail::checked_add(sum, c);
    sum_of_powers = detail::checked_add(sum_of_powers, detail::checked_pow(c, l));
  }
  // (sum)^l dominates the per-class powers, so the subtraction cannot wrap.
  return detail::checked_pow(sum, l) - sum_of_powers;
}

/// Polynomial impurity: sum of coefficient * prod_i counts[i]^exponents[i].
/// Each term touches at least two classes, so single-class sets score zero.
inline ImpurityValue eval_polynomial(const ClassCounts& counts,
                                     const std::vector<PolynomialTerm>& terms) {
  std::uint64_t total = 0;
  for (const auto& term : terms) {
    if (term.exponents.size() != counts.size())
      throw InvalidArgument("polynomial term arity does not match the number of classes");
    std::uint64_t product = term.coefficient;
    for (std::size_t i = 0; i < counts.size() && product != 0; ++i) {
      if (term.exponents[i] == 0) continue;
      product = detail::checked_mul(product, detail::checked_pow(counts[i], term.exponents[i]));
    }
    total = detail::checked_add(total, product);
  }
  return total;
}

/// Evaluates the impurity selected by `spec` on a class-count vector.
inline ImpurityValue impurity(const ImpuritySpec& spec, const ClassCounts& counts) {
  switch (spec.kind()) {
    case ImpurityKind::ThresholdPairs:
      return eval_threshold_pairs(counts, spec.alpha());
    case ImpurityKind::Powers:
      return eval_powers(counts, spec.power());
    case ImpurityKind::Polynomial:
      return eval_polynomial(counts, spec.terms());
  }
  throw InvalidArgument("unknown impurity kind");
}

}  // namespace budgetrf
