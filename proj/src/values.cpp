#include "goodmeasure/values.hpp"

#include <algorithm>
#include <map>

#include "goodmeasure/goodness.hpp"

namespace goodmeasure {

namespace {

struct IntegerSums {
    BigInt denom = 1;
    std::vector<std::uint64_t> weights;
    std::uint64_t cap = 0;
    std::vector<std::int32_t> first_item;  // -1 unreachable, -2 for the empty sum
};

std::uint64_t to_u64(const BigInt& v, const char* what) {
    if (v < 0 || !v.fits_ulong_p()) throw BudgetError(std::string(what) + " does not fit the integer range");
    return v.get_ui();
}

IntegerSums run_subset_sum(const std::vector<Rational>& masses, const ExtMass& bound, std::uint64_t budget) {
    IntegerSums dp;
    for (const auto& m : masses) dp.denom = lcm(dp.denom, m.den());
    if (bound.is_finite()) dp.denom = lcm(dp.denom, bound.value().den());
    BigInt total = 0;
    for (const auto& m : masses) {
        BigInt w = m.num() * (dp.denom / m.den());
        dp.weights.push_back(to_u64(w, "cell weight"));
        total += w;
    }
    BigInt cap = total;
    if (bound.is_finite()) {
        BigInt b = bound.value().num() * (dp.denom / bound.value().den());
        if (b < cap) cap = b;
    }
    if (cap < 0) cap = 0;
    BigInt cost = BigInt(static_cast<unsigned long>(std::max<std::size_t>(masses.size(), 1))) * (cap + 1);
    if (cost > BigInt(static_cast<unsigned long>(budget)))
        throw BudgetError("subset-sum needs " + cost.get_str() + " states, budget is " + std::to_string(budget));
    dp.cap = to_u64(cap, "bound");
    dp.first_item.assign(dp.cap + 1, -1);
    dp.first_item[0] = -2;
    std::uint64_t reach = 0;
    for (std::size_t i = 0; i < dp.weights.size(); ++i) {
        const std::uint64_t w = dp.weights[i];
        if (w > dp.cap) continue;
        std::uint64_t top = std::min(dp.cap, reach + w);
        for (std::uint64_t s = top; s >= w; --s) {
            if (dp.first_item[s] == -1 && dp.first_item[s - w] != -1) dp.first_item[s] = static_cast<std::int32_t>(i);
            if (s == w) break;
        }
        reach = top;
    }
    return dp;
}

std::vector<Rational> sums_of(const IntegerSums& dp) {
    std::vector<Rational> out;
    for (std::uint64_t s = 0; s <= dp.cap; ++s)
        if (dp.first_item[s] != -1) out.emplace_back(BigInt(static_cast<unsigned long>(s)), dp.denom);
    return out;
}

std::optional<DivisibleGroup> tail_group(const DisjointUnionData& u) {
    auto base = value_group(*u.tail_base);
    if (!base) return std::nullopt;
    auto primes = base->primes();
    if (u.tail_ratio != Rational(1))
        for (Prime p : prime_factors(u.tail_ratio.den())) primes.push_back(p);
    return DivisibleGroup(base->scale() * u.tail_first, primes);
}

}  // namespace

bool ValueSample::contains(const Rational& v) const { return std::binary_search(values_.begin(), values_.end(), v); }

std::optional<CompactOpen> ValueSample::witness(const Rational& v) const {
    if (!contains(v)) return std::nullopt;
    BigInt scaled = v.num() * (denom_ / v.den());
    std::uint64_t s = scaled.get_ui();
    std::vector<CellId> chosen;
    while (s > 0) {
        auto i = static_cast<std::size_t>((*first_item_)[s]);
        chosen.push_back(cells_[i]);
        s -= weights_[i];
    }
    return CompactOpen(std::move(chosen));
}

std::vector<Cell> cells_at_depth(const MeasureSpec& spec, std::size_t depth, std::size_t horizon) {
    std::vector<Cell> out;
    for (std::size_t i = 0; i < horizon; ++i) {
        auto root = root_state(spec, i);
        if (!root) break;
        std::vector<std::pair<CellId, CellState>> stack{{CellId{i, {}}, *root}};
        while (!stack.empty()) {
            auto [id, st] = std::move(stack.back());
            stack.pop_back();
            if (st.defective) continue;
            if (id.path.size() == depth) {
                out.push_back(Cell{id, st.mass(), false});
                continue;
            }
            auto kids = child_states(st);
            for (std::size_t k = kids.size(); k-- > 0;)
                stack.emplace_back(id.child(static_cast<std::uint32_t>(k)), std::move(kids[k]));
        }
    }
    return out;
}

ValueSample enumerate_values(const MeasureSpec& spec, std::size_t depth, std::size_t horizon, const ExtMass& bound,
                             std::uint64_t budget) {
    if (horizon == 0) throw DomainError("piece horizon must be at least 1");
    if (bound.is_finite() && bound.value().sign() <= 0) throw DomainError("bound must be positive");
    auto cells = cells_at_depth(spec, depth, horizon);
    std::vector<Rational> masses;
    for (const auto& c : cells) masses.push_back(c.mass.value());
    auto dp = run_subset_sum(masses, bound, budget);
    ValueSample vs;
    vs.values_ = sums_of(dp);
    vs.depth_ = depth;
    vs.horizon_ = horizon;
    vs.bound_ = bound;
    for (auto& c : cells) vs.cells_.push_back(std::move(c.id));
    vs.weights_ = std::move(dp.weights);
    vs.denom_ = dp.denom;
    vs.first_item_ = std::make_shared<std::vector<std::int32_t>>(std::move(dp.first_item));
    return vs;
}

std::vector<Rational> subset_sums(const std::vector<Rational>& masses, const ExtMass& bound, std::uint64_t budget) {
    return sums_of(run_subset_sum(masses, bound, budget));
}

namespace {

struct Item {
    std::uint64_t weight;
    std::size_t group, count;
};

using Bits = std::vector<std::uint64_t>;

/// Equal masses grouped and split into binary chunks, on an integer scale where
/// the weights are coprime; `limit` is the scaled bound (rounded down).
struct GroupedItems {
    BigInt unit_den = 1;   // one scaled unit is 1 / unit_den ...
    BigInt unit_num = 1;   // ... times unit_num
    std::vector<std::vector<std::size_t>> groups;
    std::vector<Item> items;
    std::uint64_t limit = 0;
    std::size_t words = 1;
    bool exact = true;     // bound is a whole number of units
};

GroupedItems group_items(const std::vector<Rational>& masses, const Rational& bound, std::uint64_t budget) {
    GroupedItems gi;
    BigInt denom = bound.den();
    for (const auto& m : masses) denom = lcm(denom, m.den());
    const BigInt big_bound = bound.num() * (denom / bound.den());
    std::map<BigInt, std::vector<std::size_t>> by_weight;
    BigInt g = 0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        BigInt w = masses[i].num() * (denom / masses[i].den());
        if (w <= 0 || w > big_bound) continue;
        by_weight[w].push_back(i);
        g = gcd(g, w);
    }
    if (g == 0) g = 1;
    gi.unit_den = denom;
    gi.unit_num = g;
    gi.exact = big_bound % g == 0;
    const BigInt scaled_bound = big_bound / g;
    gi.limit = to_u64(scaled_bound, "bound");
    std::vector<std::uint64_t> weights;
    for (auto& [w, idx] : by_weight) {
        weights.push_back(to_u64(BigInt(w / g), "cell weight"));
        gi.groups.push_back(std::move(idx));
    }
    for (std::size_t k = 0; k < gi.groups.size(); ++k) {
        std::size_t left = gi.groups[k].size();
        for (std::size_t chunk = 1; left > 0; chunk *= 2) {
            std::size_t c = std::min(chunk, left);
            left -= c;
            BigInt w = BigInt(static_cast<unsigned long>(weights[k])) * static_cast<unsigned long>(c);
            if (w <= scaled_bound) gi.items.push_back({w.get_ui(), k, c});
        }
    }
    gi.words = gi.limit / 64 + 1;
    BigInt cost = BigInt(static_cast<unsigned long>(std::max<std::size_t>(gi.items.size(), 1))) *
                  BigInt(static_cast<unsigned long>(gi.words));
    if (cost > BigInt(static_cast<unsigned long>(budget)))
        throw BudgetError("subset-sum needs " + cost.get_str() + " bitset words, budget is " + std::to_string(budget));
    return gi;
}

void shift_or(Bits& b, std::uint64_t a, std::uint64_t limit) {
    const std::size_t words = b.size();
    const std::size_t q = a / 64;
    const unsigned r = a % 64;
    for (std::size_t i = words; i-- > q;) {
        std::uint64_t v = b[i - q] << r;
        if (r != 0 && i > q) v |= b[i - q - 1] >> (64 - r);
        b[i] |= v;
    }
    if (limit % 64 != 63) b[words - 1] &= (1ULL << (limit % 64 + 1)) - 1;
}

bool test_bit(const Bits& b, std::uint64_t s) { return (b[s / 64] >> (s % 64)) & 1ULL; }

}  // namespace

std::optional<std::vector<std::size_t>> subset_sum_witness(const std::vector<Rational>& masses,
                                                           const Rational& target, std::uint64_t budget) {
    if (target.sign() < 0) return std::nullopt;
    if (target.is_zero()) return std::vector<std::size_t>{};
    auto gi = group_items(masses, target, budget);
    if (!gi.exact) return std::nullopt;
    const std::uint64_t t = gi.limit;
    const auto& items = gi.items;

    std::size_t stride = 1;
    while (stride * stride < items.size()) ++stride;
    std::vector<Bits> checkpoints;
    Bits cur(gi.words, 0);
    cur[0] = 1;
    for (std::size_t j = 0; j < items.size(); ++j) {
        if (j % stride == 0) checkpoints.push_back(cur);
        shift_or(cur, items[j].weight, t);
    }
    if (!test_bit(cur, t)) return std::nullopt;

    std::vector<std::size_t> taken(gi.groups.size(), 0);
    std::uint64_t s = t;
    for (std::size_t seg = checkpoints.size(); seg-- > 0;) {
        const std::size_t lo = seg * stride, hi = std::min(items.size(), lo + stride);
        std::vector<Bits> before{checkpoints[seg]};
        for (std::size_t j = lo; j + 1 < hi; ++j) {
            before.push_back(before.back());
            shift_or(before.back(), items[j].weight, t);
        }
        for (std::size_t j = hi; j-- > lo;) {
            if (test_bit(before[j - lo], s)) continue;
            s -= items[j].weight;
            taken[items[j].group] += items[j].count;
        }
    }
    std::vector<std::size_t> chosen;
    for (std::size_t k = 0; k < gi.groups.size(); ++k)
        chosen.insert(chosen.end(), gi.groups[k].begin(), gi.groups[k].begin() + static_cast<long>(taken[k]));
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

Rational max_subset_sum(const std::vector<Rational>& masses, const Rational& bound, std::uint64_t budget) {
    if (bound.sign() < 0) throw DomainError("bound must be non-negative");
    auto gi = group_items(masses, bound, budget);
    Bits cur(gi.words, 0);
    cur[0] = 1;
    for (const auto& it : gi.items) shift_or(cur, it.weight, gi.limit);
    for (std::uint64_t s = gi.limit;; --s)
        if (test_bit(cur, s)) return Rational(BigInt(static_cast<unsigned long>(s)) * gi.unit_num, gi.unit_den);
}

std::optional<DivisibleGroup> value_group(const MeasureSpec& spec) {
    if (auto b = spec.as_bernoulli()) {
        BigInt l = 1;
        for (const auto& w : b->weights) l = lcm(l, w.den());
        return canonical_group(b->weights, l);
    }
    if (auto p = spec.as_padic()) return DivisibleGroup(Rational(1), {p->p});
    if (spec.as_cf()) return subtree_group(*root_state(spec, 0));
    if (auto b = spec.as_bratteli()) {
        std::vector<Rational> gens;
        for (std::size_t v = 0; v < b->x.size(); ++v) {
            bool in_class = b->mode == BratteliMode::FullDiagram ||
                            std::binary_search(b->distinguished.begin(), b->distinguished.end(), v);
            if (in_class && !b->defective[v]) gens.push_back(b->x[v]);
        }
        if (gens.empty()) return std::nullopt;
        return canonical_group(gens, BigInt(b->lambda));
    }
    if (auto s = spec.as_scaled()) {
        auto g = value_group(s->inner);
        if (!g) return g;
        return g->scaled(s->factor);
    }
    if (auto r = spec.as_restricted()) {
        std::vector<DivisibleGroup> parts;
        for (const auto& c : r->within.cells) {
            auto g = subtree_group(cell_state(r->inner, c));
            if (!g) return std::nullopt;
            parts.push_back(*g);
        }
        return group_sum(parts);
    }
    if (auto u = spec.as_disjoint_union()) {
        std::vector<DivisibleGroup> parts;
        for (const auto& c : u->components) {
            auto g = value_group(c);
            if (!g) return std::nullopt;
            parts.push_back(*g);
        }
        if (u->tail_base) {
            auto g = tail_group(*u);
            if (!g) return std::nullopt;
            parts.push_back(*g);
        }
        return group_sum(parts);
    }
    if (auto p = spec.as_product()) {
        auto g = value_group(p->inner);
        if (!g) return g;
        return g->scaled(rational_gcd(p->weight_cycle));
    }
    if (auto c = spec.as_compactified()) {
        auto g = value_group(c->inner);
        if (!g) return g;
        std::vector<DivisibleGroup> parts{*g};
        for (const auto& k : c->classes.classes) {
            auto t = c->classes.classes.size() == 1 ? std::optional<ExtMass>(total_mass(c->inner))
                                                    : tail_mass(c->inner, k);
            if (!t) return std::nullopt;
            if (t->is_finite()) parts.emplace_back(t->value(), g->primes());
        }
        return group_sum(parts);
    }
    return std::nullopt;
}

std::optional<GroupLikeSet> good_value_set(const MeasureSpec& spec) {
    if (decide_good(spec).kind != VerdictKind::Good) return std::nullopt;
    auto g = value_group(spec);
    if (!g) return std::nullopt;
    return GroupLikeSet{*g, total_mass(spec), is_compact(spec)};
}

std::vector<Rational> product_value_closure(const std::vector<Rational>& a, const std::vector<Rational>& b,
                                            std::size_t terms, const ExtMass& bound, std::uint64_t budget) {
    if (terms == 0) throw DomainError("terms must be at least 1");
    auto within = [&](const Rational& v) { return bound.is_infinite() || v <= bound.value(); };
    std::vector<Rational> products;
    for (const auto& x : a)
        for (const auto& y : b)
            if (within(x * y)) products.push_back(x * y);
    std::sort(products.begin(), products.end());
    products.erase(std::unique(products.begin(), products.end()), products.end());
    std::vector<Rational> sums{Rational(0)};
    std::uint64_t spent = 0;
    for (std::size_t t = 0; t < terms; ++t) {
        spent += static_cast<std::uint64_t>(sums.size()) * products.size();
        if (spent > budget) throw BudgetError("product closure exceeds the state budget");
        std::vector<Rational> next = sums;
        for (const auto& s : sums)
            for (const auto& p : products)
                if (within(s + p)) next.push_back(s + p);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        if (next == sums) break;
        sums = std::move(next);
    }
    return sums;
}

std::vector<Rational> compactified_values(const MeasureSpec& spec, const CompactificationSpec& comp,
                                          std::size_t depth, std::size_t horizon, std::uint64_t budget) {
    comp.validate();
    const std::size_t k = comp.classes.size();
    if (k > 16) throw DomainError("too many remainder classes to enumerate");
    auto cells = cells_at_depth(spec, depth, horizon);
    std::vector<std::optional<ExtMass>> t(k);
    for (std::size_t i = 0; i < k; ++i)
        t[i] = k == 1 ? std::optional<ExtMass>(total_mass(spec)) : tail_mass(spec, comp.classes[i]);
    auto class_of = [&](std::size_t piece) {
        for (std::size_t i = 0; i < k; ++i)
            if (comp.classes[i].contains(piece)) return i;
        return k;
    };
    std::vector<Rational> masses;
    for (const auto& c : cells) masses.push_back(c.mass.value());
    auto out = subset_sums(masses, ExtMass::infinite(), budget);
    for (std::size_t mask = 1; mask < (std::size_t{1} << k); ++mask) {
        Rational base = 0;
        bool finite = true;
        for (std::size_t i = 0; i < k; ++i)
            if (mask >> i & 1) {
                if (!t[i] || t[i]->is_infinite()) finite = false;
                else base += t[i]->value();
            }
        if (!finite) continue;
        std::vector<Rational> inside, outside;
        for (const auto& c : cells)
            ((mask >> class_of(c.id.piece) & 1) ? inside : outside).push_back(c.mass.value());
        auto sa = subset_sums(inside, ExtMass::infinite(), budget);
        auto sb = subset_sums(outside, ExtMass::infinite(), budget);
        if (static_cast<std::uint64_t>(sa.size()) * sb.size() > budget)
            throw BudgetError("compactified value sample exceeds the state budget");
        for (const auto& x : sa)
            for (const auto& y : sb) out.push_back(base - x + y);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace goodmeasure
