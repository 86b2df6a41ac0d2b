#include "goodmeasure/homeo.hpp"

#include <deque>

namespace goodmeasure {

namespace {

constexpr std::size_t kDefaultHorizon = 8;
constexpr std::size_t kScanLimit = 1 << 16;

std::string verdict_name(const MeasureSpec& spec) { return to_string(decide_good(spec).kind); }

/// Unmatched parts of one side, in piece order; defective cells are replaced by their children.
struct Side {
    const MeasureSpec& spec;
    std::optional<std::size_t> count;
    std::size_t next_piece = 0;
    std::deque<CellId> pending;
    std::deque<CompactOpen> remainders;

    explicit Side(const MeasureSpec& s) : spec(s), count(piece_count(s)) {}

    bool pull() {
        for (std::size_t guard = 0; guard < kScanLimit; ++guard) {
            CellId id;
            if (!pending.empty()) {
                id = std::move(pending.front());
                pending.pop_front();
            } else {
                if (count && next_piece >= *count) return false;
                id = CellId{next_piece++, {}};
            }
            if (cell_of(spec, id).defective) {
                for (auto& k : refine(spec, id)) pending.push_back(std::move(k.id));
                continue;
            }
            remainders.push_back(CompactOpen({id}));
            return true;
        }
        return false;
    }

    bool ensure() { return !remainders.empty() || pull(); }
};

std::vector<long> base_digits(BigInt m, Prime p) {
    std::vector<long> out;
    const BigInt base(static_cast<unsigned long>(p));
    while (m > 0) {
        BigInt d = m % base;
        out.push_back(d.get_si());
        m /= base;
    }
    return out;
}

BigInt p_part(BigInt d, const std::vector<Prime>& primes) {
    BigInt out = 1;
    for (Prime p : primes) {
        const BigInt bp(static_cast<unsigned long>(p));
        while (d % bp == 0) {
            d /= bp;
            out *= bp;
        }
    }
    return out;
}

std::size_t multiplicative_order(Prime p, const BigInt& q) {
    if (q == 1) return 1;
    BigInt x = BigInt(static_cast<unsigned long>(p)) % q;
    BigInt v = x;
    for (std::size_t k = 1;; ++k) {
        if (v == 1) return k;
        v = (v * x) % q;
    }
}

MeasureSpec equidistributed(const std::vector<Prime>& primes) {
    unsigned long n = 1;
    for (Prime p : primes) n *= p;
    return MeasureSpec::bernoulli(std::vector<Rational>(n, Rational(1, static_cast<long>(n))));
}

MeasureSpec union_or_single(std::vector<MeasureSpec> parts) {
    if (parts.size() == 1) return parts.front();
    return MeasureSpec::disjoint_union(std::move(parts));
}

void push_digits(std::vector<MeasureSpec>& out, const std::vector<long>& digits, const Rational& unit, Prime p,
                 const MeasureSpec& base) {
    for (std::size_t i = 0; i < digits.size(); ++i)
        for (long k = 0; k < digits[i]; ++k)
            out.push_back(MeasureSpec::scaled(unit * pow(Rational(static_cast<long>(p)), static_cast<long>(i)), base));
}

}  // namespace

std::string to_string(HomeoKind k) {
    switch (k) {
        case HomeoKind::Homeomorphic: return "Homeomorphic";
        case HomeoKind::NotHomeomorphic: return "NotHomeomorphic";
        case HomeoKind::Unknown: return "Unknown";
    }
    return "Unknown";
}

HomeoVerdict homeo_criterion(const MeasureSpec& a, const MeasureSpec& b) {
    auto da = defective_descriptor(a), db = defective_descriptor(b);
    if (da != db) return {HomeoKind::NotHomeomorphic, "defective sets differ: " + da.str() + " vs " + db.str()};
    auto ma = total_mass(a), mb = total_mass(b);
    if (ma != mb) return {HomeoKind::NotHomeomorphic, "total masses differ: " + ma.str() + " vs " + mb.str()};
    auto ga = value_group(a), gb = value_group(b);
    if (ga && gb && !(*ga == *gb))
        return {HomeoKind::NotHomeomorphic, "value groups differ: " + ga->str() + " vs " + gb->str()};
    if (is_compact(a) != is_compact(b)) return {HomeoKind::NotHomeomorphic, "one space is compact, the other is not"};
    auto va = decide_good(a).kind, vb = decide_good(b).kind;
    if ((va == VerdictKind::Good && vb == VerdictKind::NotGood) ||
        (va == VerdictKind::NotGood && vb == VerdictKind::Good))
        return {HomeoKind::NotHomeomorphic, "goodness differs: " + to_string(va) + " vs " + to_string(vb)};
    if (va != VerdictKind::Good || vb != VerdictKind::Good)
        return {HomeoKind::Unknown, "goodness not decided exactly: " + to_string(va) + " and " + to_string(vb)};
    auto sa = good_value_set(a), sb = good_value_set(b);
    if (!sa || !sb) return {HomeoKind::Unknown, "value set not available"};
    if (!(*sa == *sb)) return {HomeoKind::NotHomeomorphic, "value sets differ"};
    return {HomeoKind::Homeomorphic, "both good with value set " + sa->group.str() + " below " + sa->bound.str() +
                                         (da.is_empty() ? "" : ", defective sets " + da.str())};
}

std::optional<Rational> weak_homeo_constant(const MeasureSpec& a, const MeasureSpec& b) {
    if (total_mass(a).is_finite() || total_mass(b).is_finite())
        throw DomainError("weak homeomorphism constants are defined for infinite measures only");
    if (defective_descriptor(a) != defective_descriptor(b)) return std::nullopt;
    if (decide_good(a).kind != VerdictKind::Good || decide_good(b).kind != VerdictKind::Good) return std::nullopt;
    auto ga = value_group(a), gb = value_group(b);
    if (!ga || !gb) return std::nullopt;
    return group_scale_relation(*gb, *ga);
}

Rational PartialHomeo::matched_mass() const {
    Rational m = 0;
    for (const auto& s : stages) m += s.mass;
    return m;
}

StageFailure::StageFailure(std::size_t stage_, std::size_t depth_, bool target_on_b_, Witness w,
                           std::optional<ValuationCertificate> cert, PartialHomeo partial_)
    : std::runtime_error("stage " + std::to_string(stage_) + ": no region of mass " + w.target.str() + " inside " +
                         w.region.str() + " within depth " + std::to_string(depth_)),
      stage(stage_),
      depth(depth_),
      witness(std::move(w)),
      target_on_b(target_on_b_),
      certificate(std::move(cert)),
      partial(std::move(partial_)) {}

PartialHomeo back_and_forth(const MeasureSpec& a, const MeasureSpec& b, std::size_t stages, std::size_t max_depth,
                            bool check_criterion, std::uint64_t budget) {
    if (stages == 0) throw DomainError("at least one stage is required");
    if (check_criterion) {
        auto h = homeo_criterion(a, b);
        if (h.kind != HomeoKind::Homeomorphic) throw DomainError("homeomorphism criterion fails: " + h.reason);
    }
    PartialHomeo out;
    out.defective = defective_descriptor(a);
    if (out.defective != defective_descriptor(b)) throw DomainError("defective sets differ");
    Side sa(a), sb(b);
    for (std::size_t stage = 1; stage <= stages; ++stage) {
        const bool forward = stage % 2 == 1;
        Side& from = forward ? sa : sb;
        Side& to = forward ? sb : sa;
        if (!from.ensure()) {
            out.exhausted = !to.ensure();
            break;
        }
        CompactOpen given = std::move(from.remainders.front());
        from.remainders.pop_front();
        const Rational m = mass_of(from.spec, given).value();
        std::vector<CellId> taken;
        Rational acc = 0;
        for (std::size_t scan = 0; acc < m; ++scan) {
            if (scan >= kScanLimit || !to.ensure())
                throw StageFailure(stage, 0, forward, Witness{m - acc, CompactOpen{}}, std::nullopt, out);
            CompactOpen& front = to.remainders.front();
            const Rational mq = mass_of(to.spec, front).value();
            if (acc + mq <= m) {
                taken.insert(taken.end(), front.cells.begin(), front.cells.end());
                acc += mq;
                to.remainders.pop_front();
                continue;
            }
            const Rational r = m - acc;
            auto carved = carve(to.spec, front, r, max_depth, budget);
            if (!carved.ok())
                throw StageFailure(stage, carved.depth, forward, Witness{r, front}, find_certificate(to.spec, front, r),
                                   out);
            taken.insert(taken.end(), carved.found->cells.begin(), carved.found->cells.end());
            front = subtract(to.spec, front, *carved.found);
            acc = m;
        }
        CompactOpen received(std::move(taken));
        if (forward) out.stages.push_back({std::move(given), std::move(received), m});
        else out.stages.push_back({std::move(received), std::move(given), m});
    }
    return out;
}

MeasureSpec build_good_measure(const GroupLikeSet& d) {
    const auto& primes = d.group.primes();
    if (primes.empty()) throw DomainError("value set must be dense (nonempty prime set)");
    const Rational c = d.group.scale();
    const MeasureSpec unit = equidistributed(primes);
    if (d.bound.is_infinite()) {
        if (d.includes_bound) throw DomainError("an infinite bound cannot be included");
        return MeasureSpec::product_counting(MeasureSpec::scaled(c, unit), {Rational(1)});
    }
    const Rational x = d.bound.value() / c;
    if (x.sign() <= 0) throw DomainError("bound must be positive");
    const BigInt big_u = p_part(x.den(), primes);
    const Rational first = c / Rational(big_u);
    const Rational y = x * Rational(big_u);

    if (d.includes_bound) {
        if (y.den() != 1) throw DomainError("an included bound must lie in the group");
        std::vector<MeasureSpec> parts;
        push_digits(parts, base_digits(y.num(), primes.front()), first, primes.front(), unit);
        return union_or_single(std::move(parts));
    }

    const BigInt q = y.den();
    Prime p = primes.front();
    std::size_t period = multiplicative_order(p, q);
    for (Prime alt : primes) {
        std::size_t l = multiplicative_order(alt, q);
        if (l * (alt - 1) < period * (p - 1)) {
            p = alt;
            period = l;
        }
    }
    BigInt whole = y.num() / y.den();
    Rational frac = y - Rational(whole);
    BigInt block;
    if (frac.is_zero()) {
        whole -= 1;
        period = 1;
        block = BigInt(static_cast<unsigned long>(p - 1));
    } else {
        BigInt pl = 1;
        for (std::size_t i = 0; i < period; ++i) pl *= BigInt(static_cast<unsigned long>(p));
        Rational r = frac * Rational(pl - 1);
        block = r.num();
    }
    std::vector<MeasureSpec> parts;
    push_digits(parts, base_digits(whole, p), first, p, unit);
    auto digits = base_digits(block, p);
    digits.resize(period, 0);
    std::vector<MeasureSpec> base_parts;
    for (std::size_t j = 1; j <= period; ++j)
        for (long k = 0; k < digits[period - j]; ++k)
            base_parts.push_back(MeasureSpec::scaled(pow(Rational(static_cast<long>(p)), -static_cast<long>(j)), unit));
    const Rational ratio = pow(Rational(static_cast<long>(p)), -static_cast<long>(period));
    return MeasureSpec::disjoint_union(std::move(parts), union_or_single(std::move(base_parts)), first, ratio);
}

GammaCompactification gamma_compactification(const MeasureSpec& spec, const Rational& gamma, std::size_t steps,
                                             std::size_t max_depth, std::uint64_t budget) {
    if (decide_good(spec).kind != VerdictKind::Good)
        throw DomainError("gamma compactification needs an exactly good measure, got " + verdict_name(spec));
    const ExtMass total = total_mass(spec);
    if (gamma.sign() <= 0 || !(ExtMass(gamma) < total)) throw DomainError("gamma must lie strictly between 0 and the total mass");
    if (steps == 0) throw DomainError("at least one step is required");
    const std::size_t horizon = piece_count(spec).value_or(kDefaultHorizon);
    std::vector<CellId> roots;
    for (const auto& c : pieces(spec, horizon))
        if (!c.defective) roots.push_back(c.id);
    CompactOpen region(roots);
    if (!(ExtMass(gamma) < mass_of(spec, region)))
        throw DomainError("gamma exceeds the mass of the first " + std::to_string(horizon) + " pieces");

    GammaCompactification out;
    out.gamma = gamma;
    out.classes = CompactificationSpec{{PieceClass::residue(2, {0}), PieceClass::residue(2, {1})}};
    CompactOpen remainder = region;
    Rational prev = 0;
    for (std::size_t depth = 1; out.parts.size() < steps && depth <= steps + max_depth; ++depth) {
        std::vector<Rational> masses;
        for (const auto& c : cells_at_depth(spec, depth, horizon)) masses.push_back(c.mass.value());
        const Rational next = max_subset_sum(masses, gamma, budget);
        if (!(prev < next)) continue;
        auto carved = carve(spec, remainder, next - prev, max_depth, budget);
        if (!carved.ok())
            throw BudgetError("no part of mass " + (next - prev).str() + " within depth " + std::to_string(max_depth));
        remainder = subtract(spec, remainder, *carved.found);
        out.parts.push_back(*carved.found);
        out.gammas.push_back(next);
        prev = next;
        if (next == gamma) {
            out.reached = true;
            break;
        }
    }

    auto g = value_group(spec);
    out.verdict.kind = VerdictKind::Good;
    out.verdict.new_values.push_back(gamma);
    if (total.is_finite()) out.verdict.new_values.push_back(total.value() - gamma);
    const auto values = out.verdict.new_values;
    for (const auto& v : values) {
        if (g && g->contains(v)) continue;
        out.verdict = Verdict::not_good("new clopen value " + v.str() + " is outside the value group",
                                        Witness{v, region});
        out.verdict.new_values = values;
        out.verdict.certificate = find_certificate(spec, region, v);
        return out;
    }
    out.verdict.reason = "new clopen values lie in the value group";
    return out;
}

}  // namespace goodmeasure
