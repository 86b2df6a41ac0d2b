#include "goodmeasure/goodness.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace goodmeasure {

std::string to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::Good: return "Good";
        case VerdictKind::NotGood: return "NotGood";
        case VerdictKind::ProbablyGood: return "ProbablyGood";
        case VerdictKind::Unknown: return "Unknown";
    }
    return "?";
}

Verdict Verdict::good(std::string reason) {
    Verdict v;
    v.kind = VerdictKind::Good;
    v.reason = std::move(reason);
    return v;
}

Verdict Verdict::unknown(std::string reason) {
    Verdict v;
    v.kind = VerdictKind::Unknown;
    v.reason = std::move(reason);
    return v;
}

Verdict Verdict::not_good(std::string reason, Witness w) {
    Verdict v;
    v.kind = VerdictKind::NotGood;
    v.reason = std::move(reason);
    v.witness = std::move(w);
    return v;
}

namespace {

struct Frontier {
    CellId id;
    CellState state;
    std::size_t limit;  // deepest allowed path length
};

std::vector<Prime> primes_up_to(Prime n) {
    std::vector<Prime> out;
    for (Prime q = 2; q <= n; ++q)
        if (is_prime(q)) out.push_back(q);
    return out;
}

CompactOpen pieces_set(const std::vector<std::size_t>& idx) {
    std::vector<CellId> cells;
    for (auto i : idx) cells.push_back(CellId{i, {}});
    return CompactOpen(std::move(cells));
}

/// Smallest prefix of pieces whose mass exceeds `than`.
std::optional<CompactOpen> prefix_exceeding(const MeasureSpec& spec, const Rational& than, std::size_t limit = 4096) {
    Rational sum = 0;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < limit; ++i) {
        auto s = root_state(spec, i);
        if (!s) return std::nullopt;
        if (s->defective) continue;
        sum += s->mass().value();
        idx.push_back(i);
        if (sum > than) return pieces_set(idx);
    }
    return std::nullopt;
}

void attach_certificate(const MeasureSpec& spec, Verdict& v) {
    if (v.witness) v.certificate = find_certificate(spec, v.witness->region, v.witness->target);
}

}  // namespace

// ---------------------------------------------------------------------------

CarveResult carve(const MeasureSpec& spec, const CompactOpen& region, const Rational& target, std::size_t max_depth,
                  std::uint64_t budget) {
    if (target.sign() < 0) throw DomainError("carve target is negative");
    ExtMass region_mass = mass_of(spec, region);
    if (region_mass.is_infinite()) throw DomainError("carve region has infinite mass");
    if (target > region_mass.value())
        throw DomainError("carve target " + target.str() + " exceeds region mass " + region_mass.value().str());
    if (target.is_zero()) return {CompactOpen{}, 0};

    std::map<std::pair<Rational, CellId>, Frontier> frontier;  // key: (-mass, id)
    for (const auto& c : region.cells) {
        auto st = cell_state(spec, c);
        frontier.emplace(std::make_pair(-st.mass().value(), c), Frontier{c, st, c.path.size() + max_depth});
    }
    Rational remaining = target;
    std::vector<CellId> taken;
    std::size_t deepest = 0;
    while (!frontier.empty()) {
        auto node = frontier.extract(frontier.begin());
        auto& f = node.mapped();
        const Rational m = -node.key().first;
        if (m <= remaining) {
            taken.push_back(f.id);
            remaining -= m;
            deepest = std::max(deepest, f.id.path.size() - (f.limit - max_depth));
            if (remaining.is_zero()) return {CompactOpen(std::move(taken)), deepest};
            continue;
        }
        if (f.id.path.size() >= f.limit) continue;
        auto kids = child_states(f.state);
        for (std::size_t k = 0; k < kids.size(); ++k) {
            auto id = f.id.child(static_cast<std::uint32_t>(k));
            auto km = kids[k].mass().value();
            frontier.emplace(std::make_pair(-km, id), Frontier{id, std::move(kids[k]), f.limit});
        }
    }

    std::vector<std::pair<CellId, CellState>> level;
    for (const auto& c : region.cells) level.emplace_back(c, cell_state(spec, c));
    for (std::size_t d = 0; d <= max_depth; ++d) {
        std::vector<Rational> masses;
        for (const auto& [id, st] : level) masses.push_back(st.mass().value());
        if (auto pick = subset_sum_witness(masses, target, budget)) {
            std::vector<CellId> cells;
            for (auto i : *pick) cells.push_back(level[i].first);
            return {CompactOpen(std::move(cells)), d};
        }
        if (d == max_depth) break;
        std::vector<std::pair<CellId, CellState>> next;
        for (const auto& [id, st] : level) {
            auto kids = child_states(st);
            for (std::size_t k = 0; k < kids.size(); ++k)
                next.emplace_back(id.child(static_cast<std::uint32_t>(k)), std::move(kids[k]));
        }
        level = std::move(next);
    }
    return {std::nullopt, max_depth};
}

bool check_valuation_certificate(const MeasureSpec& spec, const ValuationCertificate& cert) {
    if (!is_prime(cert.q) || cert.region.empty() || cert.target.sign() <= 0) return false;
    if (vq(cert.q, cert.target) >= cert.k) return false;
    for (const auto& c : cert.region.cells) {
        CellState st;
        try {
            st = cell_state(spec, c);
        } catch (const DomainError&) {
            return false;
        }
        if (st.defective) return false;
        if (vq(cert.q, st.mass().value()) < cert.k) return false;
        auto ratios = descendant_ratios(st);
        if (!ratios) return false;
        for (const auto& r : *ratios)
            if (vq(cert.q, r) < 0) return false;
    }
    return true;
}

std::optional<ValuationCertificate> find_certificate(const MeasureSpec& spec, const CompactOpen& region,
                                                     const Rational& target, Prime max_q) {
    if (region.empty() || target.sign() <= 0) return std::nullopt;
    std::vector<Rational> masses;
    for (const auto& c : region.cells) {
        auto st = cell_state(spec, c);
        if (st.defective) return std::nullopt;
        masses.push_back(st.mass().value());
    }
    for (Prime q : primes_up_to(max_q)) {
        long k = vq(q, masses.front());
        for (const auto& m : masses) k = std::min(k, vq(q, m));
        ValuationCertificate cert{q, region, k, target};
        if (check_valuation_certificate(spec, cert)) return cert;
    }
    return std::nullopt;
}

Verdict find_nongood_witness(const MeasureSpec& spec, std::size_t depth, const SearchOptions& opts) {
    if (depth == 0) throw DomainError("search depth must be at least 1");
    std::vector<Cell> regions;
    for (std::size_t d = 0; d <= depth; ++d)
        for (auto& c : cells_at_depth(spec, d, opts.horizon)) regions.push_back(std::move(c));
    std::vector<Rational> targets;
    for (const auto& c : regions) {
        const auto& m = c.mass.value();
        if (std::find(targets.begin(), targets.end(), m) == targets.end()) targets.push_back(m);
    }
    std::optional<Witness> first_failure;
    for (const auto& r : regions) {
        const auto& rm = r.mass.value();
        CompactOpen region({r.id});
        for (const auto& t : targets) {
            if (t >= rm) continue;
            if (carve(spec, region, t, depth + opts.carve_slack, opts.budget).ok()) continue;
            if (auto cert = find_certificate(spec, region, t, opts.max_q)) {
                auto v = Verdict::not_good("valuation-certificate", Witness{t, region});
                v.certificate = std::move(cert);
                v.depth = depth;
                return v;
            }
            if (!first_failure) first_failure = Witness{t, region};
        }
    }
    if (first_failure) {
        auto v = Verdict::unknown("carve failed without a certificate");
        v.witness = first_failure;
        v.depth = depth;
        return v;
    }
    Verdict v;
    v.kind = VerdictKind::ProbablyGood;
    v.reason = "all carves succeeded";
    v.depth = depth;
    return v;
}

Verdict decide_bratteli_good(const BratteliData& data) {
    BratteliData full = data;
    full.mode = BratteliMode::FullDiagram;
    if (full.distinguished.empty())
        for (std::size_t v = 1; v < full.matrix.size(); ++v) full.distinguished.push_back(v);
    std::optional<MeasureSpec> spec;
    try {
        spec = MeasureSpec::bratteli(full);
    } catch (const ValidationError& e) {
        throw DomainError(e.what());
    }
    const auto& b = *spec->as_bratteli();
    if (std::any_of(b.defective.begin(), b.defective.end(), [](bool d) { return d; }))
        return Verdict::unknown("diagram has defective vertices");
    std::vector<Rational> cls;
    std::vector<std::size_t> inside, outside;
    Rational s = 0;
    for (std::size_t v = 0; v < b.x.size(); ++v) {
        if (std::binary_search(b.distinguished.begin(), b.distinguished.end(), v)) {
            cls.push_back(b.x[v]);
            inside.push_back(v);
        } else {
            s += b.x[v];
            outside.push_back(v);
        }
    }
    if (outside.empty()) return Verdict::unknown("distinguished class covers every vertex");
    Rational h = rational_gcd(cls);
    Rational q = s / h;
    BigInt den = q.den();
    const BigInt lambda(b.lambda);
    long r = 1;
    bool good = true;
    for (Prime p : (den == 1 ? std::vector<Prime>{} : prime_factors(den))) {
        long need = vq(p, den);
        BigInt pz(static_cast<unsigned long>(p));
        if (!mpz_divisible_p(lambda.get_mpz_t(), pz.get_mpz_t())) {
            good = false;
            break;
        }
        long have = vq(p, lambda);
        r = std::max(r, (need + have - 1) / have);
    }
    if (good) {
        auto v = Verdict::good("bratteli-criterion");
        v.exponent = r;
        return v;
    }
    auto region = pieces_set(inside);
    if (s >= mass_of(*spec, region).value()) return Verdict::unknown("criterion fails but the outside mass is too large for a witness");
    auto v = Verdict::not_good("bratteli-criterion", Witness{s, region});
    attach_certificate(*spec, v);
    return v;
}

Verdict decide_product_good(const DivisibleGroup& group, const std::vector<Rational>& cycle,
                            const std::optional<MeasureSpec>& inner) {
    if (cycle.empty()) throw DomainError("weight cycle is empty");
    for (const auto& w : cycle)
        if (w.sign() <= 0) throw DomainError("counting weights must be positive");
    std::optional<std::size_t> bad;
    for (std::size_t i = 1; i < cycle.size() && !bad; ++i)
        if (!divisor_member(cycle[i] / cycle[0], group)) bad = i;
    if (!bad) return Verdict::good("product-criterion");

    Verdict v;
    v.kind = VerdictKind::NotGood;
    v.reason = "product-criterion";
    v.offending_index = bad;
    if (!inner) return v;

    auto product = MeasureSpec::product_counting(*inner, cycle);
    const std::size_t m = *piece_count(*inner);
    const Rational inner_mass = total_mass(*inner).value();
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), 0);
    const Rational r = cycle[*bad] / cycle[0];
    // Direction 0: region is the z = 0 copy, targets come from copy z = bad.
    for (int dir = 0; dir < 2 && !v.witness; ++dir) {
        const long z_region = dir == 0 ? 0 : static_cast<long>(*bad);
        const Rational w_region = cycle[dir == 0 ? 0 : *bad];
        const Rational w_target = cycle[dir == 0 ? *bad : 0];
        const Rational ratio = dir == 0 ? r : Rational(1) / r;
        for (std::size_t d = 0; d <= 16 && !v.witness; ++d) {
            for (const auto& c : cells_at_depth(*inner, d, m)) {
                const Rational cm = c.mass.value();
                if (group.contains(ratio * cm)) continue;
                if (w_target * cm >= w_region * inner_mass) continue;
                std::vector<CellId> region;
                for (auto s : all) region.push_back(CellId{product_piece_index(z_region, s, m), {}});
                v.witness = Witness{w_target * cm, CompactOpen(std::move(region))};
                break;
            }
        }
    }
    attach_certificate(product, v);
    return v;
}

Verdict decide_compactification_good(const MeasureSpec& spec, const CompactificationSpec& comp) {
    comp.validate();
    auto base = decide_good(spec);
    if (base.kind == VerdictKind::NotGood) {
        base.reason = "base space not good: " + base.reason;
        return base;
    }
    if (base.kind != VerdictKind::Good) return Verdict::unknown("base space has no exact Good verdict");
    auto g = value_group(spec);
    if (!g) return Verdict::unknown("value group of the base space is unknown");
    const ExtMass total = total_mass(spec);
    const std::size_t k = comp.classes.size();
    std::vector<ExtMass> t;
    for (const auto& c : comp.classes) {
        auto m = k == 1 ? std::optional<ExtMass>(total) : tail_mass(spec, c);
        if (!m) return Verdict::unknown("tail mass of class " + c.str() + " is unknown");
        t.push_back(*m);
    }
    std::vector<Rational> fresh;
    std::optional<std::size_t> offending;
    for (std::size_t i = 0; i < k; ++i) {
        if (t[i].is_infinite()) continue;
        fresh.push_back(t[i].value());
        if (!offending && !g->contains(t[i].value())) offending = i;
    }
    if (total.is_infinite() && k == 1) {
        auto v = Verdict::good("one-point compactification of an infinite measure");
        return v;
    }
    if (!offending) {
        auto v = Verdict::good("compactification-criterion");
        v.new_values = fresh;
        return v;
    }
    const Rational ti = t[*offending].value();
    Rational target = ti;
    if (total.is_finite() && ti == total.value()) target = ti - root_state(spec, 0)->mass().value();
    Verdict v;
    v.kind = VerdictKind::NotGood;
    v.reason = "compactification-criterion";
    v.offending_index = offending;
    v.new_values = fresh;
    if (auto region = prefix_exceeding(spec, target)) {
        v.witness = Witness{target, *region};
        attach_certificate(spec, v);
    }
    return v;
}

Verdict decide_good(const MeasureSpec& spec) {
    if (auto b = spec.as_bernoulli()) {
        bool equal = std::all_of(b->weights.begin(), b->weights.end(),
                                 [&](const Rational& w) { return w == b->weights.front(); });
        return equal ? Verdict::good("equidistributed-bernoulli")
                     : Verdict::unknown("no exact decider for unequal Bernoulli weights");
    }
    if (spec.as_padic()) return Verdict::good("padic-haar");
    if (spec.as_cf()) return Verdict::good("cf-construction");
    if (auto b = spec.as_bratteli()) {
        if (b->mode == BratteliMode::DistinguishedClass) return Verdict::good("bratteli-distinguished-class");
        if (std::any_of(b->defective.begin(), b->defective.end(), [](bool d) { return d; }))
            return Verdict::unknown("no exact decider for diagrams with defective vertices");
        return decide_bratteli_good(*b);
    }
    if (auto s = spec.as_scaled()) {
        auto v = decide_good(s->inner);
        if (v.kind == VerdictKind::NotGood && v.witness) {
            v.witness->target *= s->factor;
            v.certificate.reset();
            attach_certificate(spec, v);
        }
        return v;
    }
    if (auto r = spec.as_restricted()) {
        auto v = decide_good(r->inner);
        if (v.kind == VerdictKind::Good) return Verdict::good("restriction of a good measure");
        return Verdict::unknown("restriction of a measure without an exact Good verdict");
    }
    if (auto u = spec.as_disjoint_union()) {
        std::vector<MeasureSpec> parts = u->components;
        if (u->tail_base) parts.push_back(*u->tail_base);
        std::optional<DivisibleGroup> common;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (!is_compact(parts[i])) return Verdict::unknown("union component is not compact");
            if (decide_good(parts[i]).kind != VerdictKind::Good)
                return Verdict::unknown("union component without an exact Good verdict");
            auto g = value_group(parts[i]);
            if (!g) return Verdict::unknown("union component has an unknown value group");
            if (u->tail_base && i + 1 == parts.size()) g = g->scaled(u->tail_first);
            if (common && !(*common == *g)) return Verdict::unknown("union components have different value groups");
            common = g;
        }
        if (u->tail_base && !divisor_member(u->tail_ratio, *common))
            return Verdict::unknown("tail ratio is not a divisor of the value group");
        return Verdict::good("disjoint-union");
    }
    if (auto p = spec.as_product()) {
        if (decide_good(p->inner).kind != VerdictKind::Good)
            return Verdict::unknown("product base without an exact Good verdict");
        auto g = value_group(p->inner);
        if (!g) return Verdict::unknown("product base has an unknown value group");
        return decide_product_good(*g, p->weight_cycle, p->inner);
    }
    if (auto c = spec.as_compactified()) return decide_compactification_good(c->inner, c->classes);
    return Verdict::unknown("no exact decider");
}

}  // namespace goodmeasure
