#pragma once

/**
 * @file goodness.hpp
 * @brief Carving clopen sets of prescribed mass, exact goodness deciders,
 *        bounded witness search and valuation certificates.
 *
 * A measure is good when every compact open V contains, for each compact open
 * U with mu(U) < mu(V), a compact open W with mu(W) = mu(U).  Good verdicts
 * come only from exact deciders; search never goes beyond ProbablyGood.
 */

#include <optional>
#include <string>
#include <vector>

#include "goodmeasure/space.hpp"
#include "goodmeasure/values.hpp"

namespace goodmeasure {

enum class VerdictKind { Good, NotGood, ProbablyGood, Unknown };
std::string to_string(VerdictKind k);

/// No compact open W inside `region` has mass `target`, because every cell of
/// the region has q-adic valuation >= k, refinement never lowers valuations, and
/// v_q(target) < k.
struct ValuationCertificate {
    Prime q = 2;
    CompactOpen region;
    long k = 0;
    Rational target;
};

struct Witness {
    Rational target;
    CompactOpen region;
};

struct Verdict {
    VerdictKind kind = VerdictKind::Unknown;
    std::string reason;
    std::optional<Witness> witness;
    std::optional<ValuationCertificate> certificate;
    std::size_t depth = 0;                        // exhausted search depth (ProbablyGood)
    std::optional<long> exponent;                 // minimal R >= 1 of the Bratteli criterion
    std::optional<std::size_t> offending_index;   // product criterion
    std::vector<Rational> new_values;             // compactification criterion

    static Verdict good(std::string reason);
    static Verdict unknown(std::string reason);
    static Verdict not_good(std::string reason, Witness w);
};

struct CarveResult {
    std::optional<CompactOpen> found;
    std::size_t depth = 0;  // depth reached (found) or exhausted (not found)
    bool ok() const { return found.has_value(); }
};

/// Finds W inside `region` with mass exactly `target`, refining at most `max_depth`
/// levels below the region cells.  Greedy first (largest cell first, ties by
/// CellId), then exact subset sums depth by depth.
CarveResult carve(const MeasureSpec& spec, const CompactOpen& region, const Rational& target, std::size_t max_depth,
                  std::uint64_t budget = kDefaultBudget);

/// False for structurally unverifiable regions (defective cells, unknown refinement ratios).
bool check_valuation_certificate(const MeasureSpec& spec, const ValuationCertificate& cert);

/// Scans primes q <= max_q with k = least valuation over the region.
std::optional<ValuationCertificate> find_certificate(const MeasureSpec& spec, const CompactOpen& region,
                                                     const Rational& target, Prime max_q = 13);

struct SearchOptions {
    std::size_t horizon = 1;      // pieces whose cells serve as regions and targets
    std::size_t carve_slack = 4;  // extra refinement levels allowed per carve
    Prime max_q = 13;
    std::uint64_t budget = kDefaultBudget;
};

/// Regions are the cells of path length <= depth below the first `horizon` pieces,
/// ordered by (length, piece, path); targets are their distinct masses in the same order.
Verdict find_nongood_witness(const MeasureSpec& spec, std::size_t depth, const SearchOptions& opts = {});

/// Criterion for the probability measure defined by a stationary diagram whose
/// distinguished class is the complement of the outside vertices: good on X_B (and on
/// the one-point compactification of X_alpha) iff lambda^R * (outside mass) lies in the
/// group generated by the class entries for some R.
Verdict decide_bratteli_good(const BratteliData& data);

/// inner x Z with counting weights: good iff every weight ratio w_i / w_0 is a divisor of G.
/// With `inner` given, NotGood verdicts carry a witness (and a certificate when one exists)
/// on product_counting(inner, cycle).
Verdict decide_product_good(const DivisibleGroup& group, const std::vector<Rational>& cycle,
                            const std::optional<MeasureSpec>& inner = std::nullopt);

/// Finite-remainder compactification of a non-compact spec.
Verdict decide_compactification_good(const MeasureSpec& spec, const CompactificationSpec& comp);

/// Structural decider: Good / NotGood from exact criteria only, Unknown otherwise.
Verdict decide_good(const MeasureSpec& spec);

}  // namespace goodmeasure
