#pragma once

/**
 * @file values.hpp
 * @brief Compact-open value sets: bounded exact enumeration and closed-form groups.
 */

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "goodmeasure/space.hpp"

namespace goodmeasure {

/// A subset-sum computation would exceed its declared state budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultBudget = 10'000'000;

/// Finite truncation of S(mu): subset sums of the depth-`depth` cells below the
/// first `horizon` pieces, at most `bound`.  Every value keeps a witness.
class ValueSample {
public:
    const std::vector<Rational>& values() const& { return values_; }
    std::vector<Rational> values() && { return std::move(values_); }
    std::size_t depth() const { return depth_; }
    std::size_t horizon() const { return horizon_; }
    const ExtMass& bound() const { return bound_; }
    /// The cells whose subset sums were taken.
    const std::vector<CellId>& cells() const { return cells_; }

    bool contains(const Rational& v) const;
    /// A compact open set with mass exactly v, or nullopt when v is not in the sample.
    std::optional<CompactOpen> witness(const Rational& v) const;

private:
    friend ValueSample enumerate_values(const MeasureSpec&, std::size_t, std::size_t, const ExtMass&, std::uint64_t);
    std::vector<Rational> values_;
    std::size_t depth_ = 0, horizon_ = 0;
    ExtMass bound_;
    std::vector<CellId> cells_;
    std::vector<std::uint64_t> weights_;
    BigInt denom_ = 1;
    std::shared_ptr<std::vector<std::int32_t>> first_item_;
};

/// Cells of path length `depth` below the first `horizon` pieces, skipping defective cells.
std::vector<Cell> cells_at_depth(const MeasureSpec& spec, std::size_t depth, std::size_t horizon);

/// Throws BudgetError when cells x (scaled bound + 1) exceeds `budget`.
ValueSample enumerate_values(const MeasureSpec& spec, std::size_t depth, std::size_t horizon, const ExtMass& bound,
                             std::uint64_t budget = kDefaultBudget);

/// All subset sums of the given finite masses (no witnesses), ascending.
std::vector<Rational> subset_sums(const std::vector<Rational>& masses, const ExtMass& bound,
                                  std::uint64_t budget = kDefaultBudget);

/// Indices of masses summing exactly to target, or nullopt.  Equal masses are grouped and
/// the search runs on bitsets; throws BudgetError when items x bitset words exceeds `budget`.
std::optional<std::vector<std::size_t>> subset_sum_witness(const std::vector<Rational>& masses,
                                                           const Rational& target,
                                                           std::uint64_t budget = kDefaultBudget);

/// Largest subset sum of the masses that does not exceed bound.
Rational max_subset_sum(const std::vector<Rational>& masses, const Rational& bound,
                        std::uint64_t budget = kDefaultBudget);

/// Group generated by S(mu), or nullopt ("Unknown").
std::optional<DivisibleGroup> value_group(const MeasureSpec& spec);

/// G intersected with [0, mu(X)) (closed at mu(X) for compact specs) for specs with an exact
/// Good verdict; nullopt otherwise.
std::optional<GroupLikeSet> good_value_set(const MeasureSpec& spec);

/// Sums of at most `terms` products a * b with a in A, b in B, at most bound.
std::vector<Rational> product_value_closure(const std::vector<Rational>& a, const std::vector<Rational>& b,
                                            std::size_t terms, const ExtMass& bound,
                                            std::uint64_t budget = kDefaultBudget);

/// Sample of S on a finite-remainder compactification: the values of X together with
/// sum_{i in J} t_i - a + b for every nonempty set J of finite-mass classes, where a
/// ranges over sampled sums inside the J classes and b over the remaining classes.
std::vector<Rational> compactified_values(const MeasureSpec& spec, const CompactificationSpec& comp,
                                          std::size_t depth, std::size_t horizon,
                                          std::uint64_t budget = kDefaultBudget);

}  // namespace goodmeasure
