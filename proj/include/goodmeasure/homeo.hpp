#pragma once

/**
 * @file homeo.hpp
 * @brief Homeomorphism criteria for good measures, the stage-wise back-and-forth
 *        construction, measures with prescribed value sets and compactifications
 *        that introduce a prescribed clopen value.
 */

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "goodmeasure/goodness.hpp"

namespace goodmeasure {

enum class HomeoKind { Homeomorphic, NotHomeomorphic, Unknown };
std::string to_string(HomeoKind k);

struct HomeoVerdict {
    HomeoKind kind = HomeoKind::Unknown;
    std::string reason;
};

/// Homeomorphic iff both measures are exactly good with equal value sets and equal
/// defective descriptors; NotHomeomorphic as soon as a computable invariant differs.
HomeoVerdict homeo_criterion(const MeasureSpec& a, const MeasureSpec& b);

/// c with S(b) = c * S(a) for infinite good measures with equal descriptors.
/// Throws DomainError when either measure is finite.
std::optional<Rational> weak_homeo_constant(const MeasureSpec& a, const MeasureSpec& b);

struct Stage {
    CompactOpen source;  // on a
    CompactOpen target;  // on b
    Rational mass;
};

struct PartialHomeo {
    std::vector<Stage> stages;
    DefectiveDescriptor defective;  // matched descriptor-to-descriptor before any stage
    bool exhausted = false;         // both sides ran out of pieces

    Rational matched_mass() const;
};

/// A stage could not be completed within the depth budget.
class StageFailure : public std::runtime_error {
public:
    StageFailure(std::size_t stage, std::size_t depth, bool target_on_b, Witness w,
                 std::optional<ValuationCertificate> cert, PartialHomeo partial);
    std::size_t stage;
    std::size_t depth;
    Witness witness;  // target mass and the region (on the receiving side) searched
    bool target_on_b;
    std::optional<ValuationCertificate> certificate;
    PartialHomeo partial;
};

/// Odd stages take the next unmatched piece of a and carve its mass out of b's
/// unmatched remainder (whole pieces first, then one carve in the boundary piece);
/// even stages swap roles.  Throws DomainError when `check_criterion` is set and
/// homeo_criterion is not Homeomorphic.
PartialHomeo back_and_forth(const MeasureSpec& a, const MeasureSpec& b, std::size_t stages, std::size_t max_depth,
                            bool check_criterion = true, std::uint64_t budget = kDefaultBudget);

/// A forest whose value set is exactly D: scaled equidistributed pieces with masses
/// read off the base-p expansion of bound / scale, a counting product for infinite bounds.
MeasureSpec build_good_measure(const GroupLikeSet& d);

/// Carved parts U_1, U_2, ... with mass(U_n) = gamma_n - gamma_{n-1}, gamma_n increasing to
/// gamma.  The compactification separates the carved parts (even pieces of the resulting
/// forest) from the rest (odd pieces).
struct GammaCompactification {
    Rational gamma;
    std::vector<Rational> gammas;
    std::vector<CompactOpen> parts;
    bool reached = false;  // some gamma_n equals gamma
    CompactificationSpec classes;
    Verdict verdict;
};

GammaCompactification gamma_compactification(const MeasureSpec& spec, const Rational& gamma, std::size_t steps = 8,
                                             std::size_t max_depth = 16, std::uint64_t budget = kDefaultBudget);

}  // namespace goodmeasure
