#include "goodmeasure/space.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

namespace goodmeasure {

namespace detail {

struct DistinguishedCache {
    std::mutex m;
    bool started = false;
    bool exhausted = false;
    long level = 0;
    std::vector<std::pair<long, long>> pieces;  // (vertex, level)
    std::vector<long> frontier;                 // outside cells on `level`
    std::optional<std::optional<std::size_t>> count;
};

struct SpecNode {
    std::variant<BernoulliData, BratteliData, CFData, PAdicHaarData, ScaledData, RestrictedData,
                 DisjointUnionData, ProductCountingData, CompactifiedData>
        data;
    std::shared_ptr<DistinguishedCache> cache;
    std::vector<std::pair<std::size_t, std::size_t>> explicit_index;  // (component, piece)
    std::size_t base_pieces = 0;
};

}  // namespace detail

using detail::SpecNode;

namespace {

constexpr std::size_t kFrontierLimit = 4'000'000;

Rational to_rational(const BigInt& n) { return Rational(n, BigInt(1)); }

// ---------------------------------------------------------------------------
// CF cardinalities

long cf_c(const CFData& d, long n) {
    return n <= static_cast<long>(d.c_sizes.size()) ? d.c_sizes[static_cast<std::size_t>(n - 1)]
                                                    : d.c_sizes.back();
}

BigInt cf_slack_tail(const CFData& d) {
    if (d.f_sizes.size() < 2) return 2;
    long k = static_cast<long>(d.f_sizes.size());
    return BigInt(d.f_sizes[static_cast<std::size_t>(k - 1)]) -
           BigInt(d.f_sizes[static_cast<std::size_t>(k - 2)]) * cf_c(d, k);
}

/// |F_n| - |F_{n-1}| |C_n| (|F_1| for n = 1): number of points in block n.
BigInt cf_count(const CFData& d, long n) {
    if (n == 1) return d.f_sizes[0];
    if (n <= static_cast<long>(d.f_sizes.size()))
        return BigInt(d.f_sizes[static_cast<std::size_t>(n - 1)]) -
               BigInt(d.f_sizes[static_cast<std::size_t>(n - 2)]) * cf_c(d, n);
    return cf_slack_tail(d);
}

/// 1 / (|C_1| ... |C_n|)
Rational cf_unit(const CFData& d, long n) {
    BigInt p = 1;
    for (long k = 1; k <= n; ++k) p *= cf_c(d, k);
    return Rational(BigInt(1), p);
}

// ---------------------------------------------------------------------------
// Bratteli helpers

std::vector<std::size_t> reachable(const BratteliData& b, std::size_t v) {
    std::vector<bool> seen(b.matrix.size(), false);
    std::vector<std::size_t> stack{v}, out;
    seen[v] = true;
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        out.push_back(u);
        for (std::size_t w = 0; w < b.matrix.size(); ++w)
            if (b.matrix[u][w] > 0 && !seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> outside_vertices(const BratteliData& b) {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < b.matrix.size(); ++v)
        if (!std::binary_search(b.distinguished.begin(), b.distinguished.end(), v)) out.push_back(v);
    return out;
}

Rational bratteli_mass(const BratteliData& b, std::size_t w, long level) {
    return b.x[w] * pow(Rational(b.lambda), -level);
}

void advance_distinguished(const BratteliData& b, detail::DistinguishedCache& c, std::size_t want) {
    auto outside = outside_vertices(b);
    if (!c.started) {
        for (auto v : b.distinguished) c.pieces.emplace_back(static_cast<long>(v), 0);
        for (auto v : outside) c.frontier.push_back(static_cast<long>(v));
        c.started = true;
        c.exhausted = c.frontier.empty();
    }
    while (c.pieces.size() < want && !c.exhausted) {
        std::vector<long> next;
        for (long v : c.frontier) {
            const auto& row = b.matrix[static_cast<std::size_t>(v)];
            for (auto w : b.distinguished)
                for (long k = 0; k < row[w]; ++k) c.pieces.emplace_back(static_cast<long>(w), c.level + 1);
            for (auto w : outside)
                for (long k = 0; k < row[w]; ++k) next.push_back(static_cast<long>(w));
            if (next.size() > kFrontierLimit)
                throw DomainError("distinguished-class enumeration exceeds the frontier limit");
        }
        c.frontier = std::move(next);
        ++c.level;
        if (c.frontier.empty()) c.exhausted = true;
    }
}

bool outside_acyclic(const BratteliData& b) {
    auto outside = outside_vertices(b);
    std::map<std::size_t, int> indeg;
    for (auto v : outside) indeg[v] = 0;
    for (auto v : outside)
        for (auto w : outside)
            if (b.matrix[v][w] > 0) ++indeg[w];
    std::vector<std::size_t> ready;
    for (auto& [v, d] : indeg)
        if (d == 0) ready.push_back(v);
    std::size_t removed = 0;
    while (!ready.empty()) {
        auto v = ready.back();
        ready.pop_back();
        ++removed;
        for (auto w : outside)
            if (b.matrix[v][w] > 0 && --indeg[w] == 0) ready.push_back(w);
    }
    return removed == outside.size();
}

std::optional<std::size_t> distinguished_count(const SpecNode& node) {
    const auto& b = std::get<BratteliData>(node.data);
    auto& c = *node.cache;
    std::lock_guard lock(c.m);
    if (!c.count) {
        if (!outside_acyclic(b)) {
            c.count = std::optional<std::size_t>{};
        } else {
            advance_distinguished(b, c, static_cast<std::size_t>(-1));
            c.count = c.pieces.size();
        }
    }
    return *c.count;
}

std::optional<std::pair<long, long>> distinguished_piece(const SpecNode& node, std::size_t i) {
    const auto& b = std::get<BratteliData>(node.data);
    auto& c = *node.cache;
    std::lock_guard lock(c.m);
    advance_distinguished(b, c, i + 1);
    if (i >= c.pieces.size()) return std::nullopt;
    return c.pieces[i];
}

// ---------------------------------------------------------------------------

template <class T>
const T* get(const SpecNode& n) {
    return std::get_if<T>(&n.data);
}

long zigzag(std::size_t t) {
    return t % 2 == 1 ? static_cast<long>((t + 1) / 2) : -static_cast<long>(t / 2);
}

std::size_t cycle_index(long z, std::size_t len) {
    long l = static_cast<long>(len);
    return static_cast<std::size_t>(((z % l) + l) % l);
}

std::vector<Rational> dedupe(std::vector<Rational> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// CellId / CompactOpen / descriptors

bool CellId::is_ancestor_of(const CellId& other) const {
    return piece == other.piece && path.size() < other.path.size() &&
           std::equal(path.begin(), path.end(), other.path.begin());
}

CellId CellId::child(std::uint32_t i) const {
    CellId c = *this;
    c.path.push_back(i);
    return c;
}

std::string CellId::str() const {
    std::ostringstream os;
    os << piece << ":[";
    for (std::size_t i = 0; i < path.size(); ++i) os << (i ? "," : "") << path[i];
    os << "]";
    return os.str();
}

CompactOpen::CompactOpen(std::vector<CellId> c, bool inf) : cells(std::move(c)), infinite_mass(inf) {
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    for (std::size_t i = 0; i + 1 < cells.size(); ++i)
        if (cells[i].is_ancestor_of(cells[i + 1]))
            throw DomainError("compact open set is not an antichain: " + cells[i].str() + " contains " +
                              cells[i + 1].str());
}

bool CompactOpen::inside(const CompactOpen& outer) const {
    return std::all_of(cells.begin(), cells.end(), [&](const CellId& c) {
        return std::any_of(outer.cells.begin(), outer.cells.end(),
                           [&](const CellId& o) { return o == c || o.is_ancestor_of(c); });
    });
}

bool CompactOpen::disjoint_from(const CompactOpen& other) const {
    for (const auto& a : cells)
        for (const auto& b : other.cells)
            if (a == b || a.is_ancestor_of(b) || b.is_ancestor_of(a)) return false;
    return true;
}

std::string CompactOpen::str() const {
    std::string s = "{";
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? ", " : "") + cells[i].str();
    return s + "}";
}

DefectiveDescriptor DefectiveDescriptor::finite_points(std::size_t n) {
    DefectiveDescriptor d;
    d.points_ = n;
    return d;
}

DefectiveDescriptor DefectiveDescriptor::cantor_set() {
    DefectiveDescriptor d;
    d.cantor_ = true;
    return d;
}

DefectiveDescriptor DefectiveDescriptor::disjoint_union(const DefectiveDescriptor& a,
                                                        const DefectiveDescriptor& b) {
    DefectiveDescriptor d;
    d.cantor_ = a.cantor_ || b.cantor_;
    d.points_ = a.points_ + b.points_;
    return d;
}

std::string DefectiveDescriptor::str() const {
    if (is_empty()) return "Empty";
    if (!cantor_) return "FinitePoints(" + std::to_string(points_) + ")";
    if (points_ == 0) return "CantorSet";
    return "Union(CantorSet, FinitePoints(" + std::to_string(points_) + "))";
}

PieceClass PieceClass::residue(std::size_t modulus, std::vector<std::size_t> residues) {
    if (modulus == 0) throw DomainError("residue class modulus must be positive");
    for (auto r : residues)
        if (r >= modulus) throw DomainError("residue out of range");
    std::sort(residues.begin(), residues.end());
    residues.erase(std::unique(residues.begin(), residues.end()), residues.end());
    PieceClass c;
    c.modulus = modulus;
    c.residues = std::move(residues);
    return c;
}

PieceClass PieceClass::listed(std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    PieceClass c;
    c.residues.clear();
    c.explicit_list = std::move(indices);
    return c;
}

bool PieceClass::contains(std::size_t piece) const {
    if (explicit_list) return std::binary_search(explicit_list->begin(), explicit_list->end(), piece);
    return std::binary_search(residues.begin(), residues.end(), piece % modulus);
}

std::string PieceClass::str() const {
    std::ostringstream os;
    if (explicit_list) {
        os << "{";
        for (std::size_t i = 0; i < explicit_list->size(); ++i) os << (i ? "," : "") << (*explicit_list)[i];
        os << "}";
        return os.str();
    }
    os << "{";
    for (std::size_t i = 0; i < residues.size(); ++i) os << (i ? "," : "") << residues[i];
    os << "} mod " << modulus;
    return os.str();
}

void CompactificationSpec::validate() const {
    if (classes.empty()) throw ValidationError("compactification needs at least one class");
    std::size_t m = 1;
    for (const auto& c : classes) {
        if (!c.is_infinite()) throw ValidationError("compactification classes must be infinite residue classes");
        m = std::lcm(m, c.modulus);
    }
    for (std::size_t i = 0; i < m; ++i) {
        auto hits = std::count_if(classes.begin(), classes.end(), [&](const PieceClass& c) { return c.contains(i); });
        if (hits != 1)
            throw ValidationError("compactification classes do not partition the pieces (index " +
                                  std::to_string(i) + ")");
    }
}

std::string to_string(SpecKind k) {
    switch (k) {
        case SpecKind::Bernoulli: return "Bernoulli";
        case SpecKind::StationaryBratteli: return "StationaryBratteli";
        case SpecKind::CF: return "CF";
        case SpecKind::PAdicHaar: return "PAdicHaar";
        case SpecKind::Scaled: return "Scaled";
        case SpecKind::Restricted: return "Restricted";
        case SpecKind::DisjointUnion: return "DisjointUnion";
        case SpecKind::ProductCounting: return "ProductCounting";
        case SpecKind::Compactified: return "Compactified";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Construction

SpecKind MeasureSpec::kind() const { return static_cast<SpecKind>(node_->data.index()); }

const BernoulliData* MeasureSpec::as_bernoulli() const { return get<BernoulliData>(*node_); }
const BratteliData* MeasureSpec::as_bratteli() const { return get<BratteliData>(*node_); }
const CFData* MeasureSpec::as_cf() const { return get<CFData>(*node_); }
const PAdicHaarData* MeasureSpec::as_padic() const { return get<PAdicHaarData>(*node_); }
const ScaledData* MeasureSpec::as_scaled() const { return get<ScaledData>(*node_); }
const RestrictedData* MeasureSpec::as_restricted() const { return get<RestrictedData>(*node_); }
const DisjointUnionData* MeasureSpec::as_disjoint_union() const { return get<DisjointUnionData>(*node_); }
const ProductCountingData* MeasureSpec::as_product() const { return get<ProductCountingData>(*node_); }
const CompactifiedData* MeasureSpec::as_compactified() const { return get<CompactifiedData>(*node_); }

MeasureSpec MeasureSpec::bernoulli(std::vector<Rational> weights) {
    if (weights.size() < 2) throw ValidationError("Bernoulli needs at least two symbols");
    Rational sum = 0;
    for (const auto& w : weights) {
        if (w.sign() <= 0) throw ValidationError("Bernoulli weight must be positive: " + w.str());
        sum += w;
    }
    if (sum != 1) throw ValidationError("Bernoulli weights sum to " + sum.str() + ", not 1");
    SpecNode n;
    n.data = BernoulliData{std::move(weights)};
    return MeasureSpec(std::make_shared<const SpecNode>(std::move(n)));
}

MeasureSpec MeasureSpec::bratteli(BratteliData b) {
    const std::size_t n = b.matrix.size();
    if (n == 0) throw ValidationError("Bratteli matrix is empty");
    for (const auto& row : b.matrix) {
        if (row.size() != n) throw ValidationError("Bratteli matrix is not square");
        for (long e : row)
            if (e < 0) throw ValidationError("Bratteli matrix has a negative entry");
    }
    if (b.lambda < 2) throw ValidationError("Bratteli eigenvalue must be at least 2");
    if (b.x.size() != n) throw ValidationError("eigenvector length differs from matrix size");
    if (b.defective.empty()) b.defective.assign(n, false);
    if (b.defective.size() != n) throw ValidationError("defective flags length differs from matrix size");
    for (const auto& xv : b.x)
        if (xv.sign() <= 0) throw ValidationError("eigenvector entries must be positive");
    for (std::size_t v = 0; v < n; ++v) {
        long rowsum = std::accumulate(b.matrix[v].begin(), b.matrix[v].end(), 0L);
        if (rowsum == 0) throw ValidationError("vertex " + std::to_string(v) + " has no children");
        if (b.defective[v]) {
            long def = 0;
            bool finite_child = false;
            for (std::size_t w = 0; w < n; ++w) {
                if (b.defective[w]) def += b.matrix[v][w];
                else if (b.matrix[v][w] > 0) finite_child = true;
            }
            if (def < b.lambda || !finite_child)
                throw ValidationError("defective vertex " + std::to_string(v) +
                                      " needs infinite growth and a finite child");
            continue;
        }
        Rational ax = 0;
        for (std::size_t w = 0; w < n; ++w) {
            if (b.matrix[v][w] > 0 && b.defective[w])
                throw ValidationError("finite vertex " + std::to_string(v) + " has a defective child");
            ax += Rational(b.matrix[v][w]) * b.x[w];
        }
        if (ax != Rational(b.lambda) * b.x[v])
            throw ValidationError("eigen identity fails at vertex " + std::to_string(v) + ": (Ax) = " + ax.str() +
                                  ", lambda x = " + (Rational(b.lambda) * b.x[v]).str());
    }
    std::sort(b.distinguished.begin(), b.distinguished.end());
    b.distinguished.erase(std::unique(b.distinguished.begin(), b.distinguished.end()), b.distinguished.end());
    for (auto v : b.distinguished)
        if (v >= n) throw ValidationError("distinguished vertex out of range");
    SpecNode node;
    if (b.mode == BratteliMode::DistinguishedClass) {
        if (b.distinguished.empty()) throw ValidationError("distinguished class is empty");
        auto outside = outside_vertices(b);
        for (auto a : b.distinguished) {
            if (b.defective[a]) throw ValidationError("distinguished class contains a defective vertex");
            for (auto o : outside)
                if (b.matrix[a][o] > 0) throw ValidationError("distinguished class has an edge leaving it");
        }
        for (auto o : outside) {
            if (b.defective[o]) continue;
            long s = 0;
            for (auto w : outside) s += b.matrix[o][w];
            if (s >= b.lambda)
                throw ValidationError("outside vertex " + std::to_string(o) + " does not lose mass to the class");
        }
        node.cache = std::make_shared<detail::DistinguishedCache>();
    }
    node.data = std::move(b);
    return MeasureSpec(std::make_shared<const SpecNode>(std::move(node)));
}

MeasureSpec MeasureSpec::cf(std::vector<long> f_sizes, std::vector<long> c_sizes) {
    if (f_sizes.empty() || c_sizes.empty()) throw ValidationError("CF needs |F_1| and at least one |C_n|");
    if (f_sizes[0] < 1) throw ValidationError("|F_1| must be positive");
    for (long c : c_sizes)
        if (c < 2) throw ValidationError("|C_n| must exceed 1");
    CFData d{std::move(f_sizes), std::move(c_sizes)};
    for (std::size_t k = 1; k < d.f_sizes.size(); ++k) {
        long need = d.f_sizes[k - 1] * cf_c(d, static_cast<long>(k + 1)) + 2;
        if (d.f_sizes[k] < need)
            throw ValidationError("|F_" + std::to_string(k + 1) + "| = " + std::to_string(d.f_sizes[k]) +
                                  " is below |F_n||C_{n+1}| + 2 = " + std::to_string(need));
    }
    SpecNode n;
    n.data = std::move(d);
    return MeasureSpec(std::make_shared<const SpecNode>(std::move(n)));
}

MeasureSpec MeasureSpec::padic_haar(Prime p) {
    if (!is_prime(p)) throw ValidationError("PAdicHaar needs a prime, got " + std::to_string(p));
    SpecNode n;
    n.data = PAdicHaarData{p};
    return MeasureSpec(std::make_shared<const SpecNode>(std::move(n)));
}

MeasureSpec MeasureSpec::scaled(Rational factor, MeasureSpec inner) {
    if (factor.sign() <= 0) throw ValidationError("scale factor must be positive");
    SpecNode n;
    n.data = ScaledData{std::move(factor), std::move(inner)};
    return MeasureSpec(std::make_shared<const SpecNode>(std::move(n)));
}

MeasureSpec MeasureSpec::restricted(MeasureSpec inner, CompactOpen within) {
    if (within.empty()) throw ValidationError("restriction to an empty set");
    for (const auto& c : within.cells) cell_state(inner, c);
    SpecNode n;
    n.data = RestrictedData{std::move(inner), std::move(within)};
    return MeasureSpec(std::make_shared<const SpecNode>(std::move(n)));
}

MeasureSpec MeasureSpec::disjoint_union(std::vector<MeasureSpec> components, std::optional<MeasureSpec> tail_base,
                                        Rational tail_first, Rational tail_ratio) {
    SpecNode n;
    for (std::size_t c = 0; c < components.size(); ++c) {
        auto count = piece_count(components[c]);
        if (!count) throw ValidationError("explicit union components must have finitely many pieces");
        for (std::size_t s = 0; s < *count; ++s) n.explicit_index.emplace_back(c, s);
    }
    if (tail_base) {
        auto count = piece_count(*tail_base);
        if (!count || *count == 0) throw ValidationError("tail base must have finitely many pieces");
        if (!defective_descriptor(*tail_base).is_empty() || total_mass(*tail_base).is_infinite())
            throw ValidationError("tail base must have finite mass");
        if (tail_first.sign() <= 0 || tail_ratio.sign() <= 0)
            throw ValidationError("tail first term and ratio must be positive");
        n.base_pieces = *count;
    }
    if (n.explicit_index.empty() && !tail_base) throw ValidationError("disjoint union is empty");
    n.data = DisjointUnionData{std::move(components), std::move(tail_base), std::move(tail_first),
                               std::move(tail_ratio)};
    return MeasureSpec(std::make_shared<const SpecNode>(std::move(n)));
}

MeasureSpec MeasureSpec::product_counting(MeasureSpec inner, std::vector<Rational> cycle) {
    auto count = piece_count(inner);
    if (!count) throw ValidationError("product inner spec must have finitely many pieces");
    if (total_mass(inner).is_infinite()) throw ValidationError("product inner spec must have finite mass");
    if (cycle.empty()) throw ValidationError("weight cycle is empty");
    for (const auto& w : cycle)
        if (w.sign() <= 0) throw ValidationError("counting weights must be positive");
    SpecNode n;
    n.base_pieces = *count;
    n.data = ProductCountingData{std::move(inner), std::move(cycle)};
    return MeasureSpec(std::make_shared<const SpecNode>(std::move(n)));
}

MeasureSpec MeasureSpec::compactified(MeasureSpec inner, CompactificationSpec classes) {
    classes.validate();
    if (piece_count(inner)) throw ValidationError("only non-compact spaces are compactified");
    if (total_mass(inner).is_infinite() && classes.classes.size() > 1)
        for (const auto& c : classes.classes)
            if (!tail_mass(inner, c))
                throw ValidationError("remainder class mass is unknown for class " + c.str());
    SpecNode n;
    n.data = CompactifiedData{std::move(inner), std::move(classes)};
    return MeasureSpec(std::make_shared<const SpecNode>(std::move(n)));
}

// ---------------------------------------------------------------------------
// States

std::optional<CellState> root_state(const MeasureSpec& spec, std::size_t i) {
    const auto& node = spec.node();
    CellState s;
    s.leaf = spec.node_ptr();
    if (get<BernoulliData>(node)) {
        if (i > 0) return std::nullopt;
        s.local_mass = Rational(1);
        return s;
    }
    if (auto p = get<PAdicHaarData>(node)) {
        if (i == 0) {
            s.local_mass = Rational(1);
            return s;
        }
        Rational pp(static_cast<long>(p->p));
        s.local_mass = Rational(static_cast<long>(p->p - 1)) * pow(pp, static_cast<long>(i) - 1);
        s.block = static_cast<long>(p->p - 1);
        s.level = static_cast<long>(i);
        return s;
    }
    if (auto c = get<CFData>(node)) {
        long n = static_cast<long>(i) + 1;
        BigInt count = cf_count(*c, n);
        if (!count.fits_slong_p()) throw DomainError("CF block too large");
        s.block = count.get_si();
        s.level = n;
        s.local_mass = to_rational(count) * cf_unit(*c, n);
        return s;
    }
    if (auto b = get<BratteliData>(node)) {
        if (b->mode == BratteliMode::FullDiagram) {
            if (i >= b->matrix.size()) return std::nullopt;
            s.vertex = static_cast<long>(i);
            s.defective = b->defective[i];
            s.local_mass = s.defective ? ExtMass::infinite() : ExtMass(b->x[i]);
            return s;
        }
        auto vl = distinguished_piece(node, i);
        if (!vl) return std::nullopt;
        s.vertex = vl->first;
        s.level = vl->second;
        s.local_mass = bratteli_mass(*b, static_cast<std::size_t>(s.vertex), s.level);
        return s;
    }
    if (auto sc = get<ScaledData>(node)) {
        auto r = root_state(sc->inner, i);
        if (r) r->factor *= sc->factor;
        return r;
    }
    if (auto rs = get<RestrictedData>(node)) {
        if (i >= rs->within.cells.size()) return std::nullopt;
        return cell_state(rs->inner, rs->within.cells[i]);
    }
    if (auto du = get<DisjointUnionData>(node)) {
        if (i < node.explicit_index.size()) {
            auto [c, sub] = node.explicit_index[i];
            return root_state(du->components[c], sub);
        }
        if (!du->tail_base) return std::nullopt;
        std::size_t j = i - node.explicit_index.size();
        std::size_t k = j / node.base_pieces, sub = j % node.base_pieces;
        auto r = root_state(*du->tail_base, sub);
        r->factor *= du->tail_first * pow(du->tail_ratio, static_cast<long>(k));
        return r;
    }
    if (auto pc = get<ProductCountingData>(node)) {
        std::size_t t = i / node.base_pieces, sub = i % node.base_pieces;
        auto r = root_state(pc->inner, sub);
        r->factor *= pc->weight_cycle[cycle_index(zigzag(t), pc->weight_cycle.size())];
        return r;
    }
    if (auto cp = get<CompactifiedData>(node)) return root_state(cp->inner, i);
    throw DomainError("unhandled spec kind");
}

std::vector<CellState> child_states(const CellState& s) {
    const auto& node = *s.leaf;
    std::vector<CellState> out;
    auto child = [&](ExtMass local) {
        CellState c = s;
        c.local_mass = std::move(local);
        c.block = 0;
        return c;
    };
    if (auto b = get<BernoulliData>(node)) {
        for (const auto& w : b->weights) out.push_back(child(s.local_mass * w));
        return out;
    }
    if (auto p = get<PAdicHaarData>(node)) {
        if (s.block > 0) {
            Rational m = s.local_mass.value() / Rational(s.block);
            for (long k = 0; k < s.block; ++k) out.push_back(child(m));
        } else {
            Rational m = s.local_mass.value() / Rational(static_cast<long>(p->p));
            for (Prime k = 0; k < p->p; ++k) out.push_back(child(m));
        }
        return out;
    }
    if (auto c = get<CFData>(node)) {
        if (s.block > 0) {
            for (long k = 0; k < s.block; ++k) out.push_back(child(cf_unit(*c, s.level)));
        } else {
            long n = s.level + 1;
            for (long k = 0; k < cf_c(*c, n); ++k) {
                auto ch = child(cf_unit(*c, n));
                ch.level = n;
                out.push_back(ch);
            }
        }
        return out;
    }
    if (auto b = get<BratteliData>(node)) {
        auto v = static_cast<std::size_t>(s.vertex);
        for (std::size_t w = 0; w < b->matrix.size(); ++w)
            for (long k = 0; k < b->matrix[v][w]; ++k) {
                CellState c = s;
                c.vertex = static_cast<long>(w);
                c.level = s.level + 1;
                c.defective = b->defective[w];
                c.local_mass = c.defective ? ExtMass::infinite() : ExtMass(bratteli_mass(*b, w, c.level));
                out.push_back(c);
            }
        return out;
    }
    throw DomainError("cell state does not belong to a leaf spec");
}

CellState cell_state(const MeasureSpec& spec, const CellId& id) {
    auto s = root_state(spec, id.piece);
    if (!s) throw DomainError("no piece " + std::to_string(id.piece));
    for (auto step : id.path) {
        auto kids = child_states(*s);
        if (step >= kids.size()) throw DomainError("no cell " + id.str());
        s = std::move(kids[step]);
    }
    return *s;
}

std::optional<std::vector<Rational>> descendant_ratios(const CellState& s) {
    if (s.defective) return std::nullopt;
    const auto& node = *s.leaf;
    std::vector<Rational> out;
    if (auto b = get<BernoulliData>(node)) {
        out = b->weights;
    } else if (auto p = get<PAdicHaarData>(node)) {
        out.emplace_back(1, static_cast<long>(p->p));
        if (s.block > 0) out.emplace_back(1, s.block);
    } else if (auto c = get<CFData>(node)) {
        long last = std::max<long>(static_cast<long>(c->c_sizes.size()), s.level + 1);
        for (long m = s.level + 1; m <= last; ++m) out.emplace_back(1, cf_c(*c, m));
        if (s.block > 0) out.emplace_back(1, s.block);
    } else if (auto b = get<BratteliData>(node)) {
        for (auto v : reachable(*b, static_cast<std::size_t>(s.vertex))) {
            if (b->defective[v]) return std::nullopt;
            for (std::size_t w = 0; w < b->matrix.size(); ++w)
                if (b->matrix[v][w] > 0) out.push_back(b->x[w] / (Rational(b->lambda) * b->x[v]));
        }
    } else {
        return std::nullopt;
    }
    return dedupe(std::move(out));
}

std::optional<DivisibleGroup> subtree_group(const CellState& s) {
    if (s.defective) return std::nullopt;
    const auto& node = *s.leaf;
    std::optional<DivisibleGroup> g;
    if (auto b = get<BernoulliData>(node)) {
        BigInt l = 1;
        for (const auto& w : b->weights) l = lcm(l, w.den());
        std::vector<Rational> gens{s.local_mass.value()};
        g = canonical_group(gens, l);
    } else if (auto p = get<PAdicHaarData>(node)) {
        Rational base = s.block > 0 ? s.local_mass.value() / Rational(s.block) : s.local_mass.value();
        g = DivisibleGroup(base, {p->p});
    } else if (auto c = get<CFData>(node)) {
        long last = std::max<long>(static_cast<long>(c->c_sizes.size()), s.level) + 1;
        std::vector<Rational> gens;
        for (long m = std::max(1L, s.level); m <= last; ++m) gens.push_back(cf_unit(*c, m));
        g = canonical_group(gens, BigInt(c->c_sizes.back()));
    } else if (auto b = get<BratteliData>(node)) {
        std::vector<Rational> gens;
        for (auto v : reachable(*b, static_cast<std::size_t>(s.vertex))) {
            if (b->defective[v]) return std::nullopt;
            gens.push_back(b->x[v]);
        }
        g = canonical_group(gens, BigInt(b->lambda)).scaled(pow(Rational(b->lambda), -s.level));
    } else {
        return std::nullopt;
    }
    return g->scaled(s.factor);
}

// ---------------------------------------------------------------------------
// Operations

std::optional<std::size_t> piece_count(const MeasureSpec& spec) {
    const auto& node = spec.node();
    if (get<BernoulliData>(node)) return 1;
    if (get<PAdicHaarData>(node) || get<CFData>(node) || get<ProductCountingData>(node)) return std::nullopt;
    if (auto b = get<BratteliData>(node)) {
        if (b->mode == BratteliMode::FullDiagram) return b->matrix.size();
        return distinguished_count(node);
    }
    if (auto sc = get<ScaledData>(node)) return piece_count(sc->inner);
    if (auto rs = get<RestrictedData>(node)) return rs->within.cells.size();
    if (auto du = get<DisjointUnionData>(node)) {
        if (du->tail_base) return std::nullopt;
        return node.explicit_index.size();
    }
    if (auto cp = get<CompactifiedData>(node)) return piece_count(cp->inner);
    return std::nullopt;
}

std::vector<Cell> pieces(const MeasureSpec& spec, std::size_t count) {
    std::vector<Cell> out;
    for (std::size_t i = 0; i < count; ++i) {
        auto s = root_state(spec, i);
        if (!s) break;
        out.push_back(Cell{CellId{i, {}}, s->mass(), s->defective});
    }
    return out;
}

std::vector<Cell> refine(const MeasureSpec& spec, const CellId& cell) {
    auto kids = child_states(cell_state(spec, cell));
    std::vector<Cell> out;
    out.reserve(kids.size());
    for (std::size_t i = 0; i < kids.size(); ++i)
        out.push_back(Cell{cell.child(static_cast<std::uint32_t>(i)), kids[i].mass(), kids[i].defective});
    return out;
}

Cell cell_of(const MeasureSpec& spec, const CellId& id) {
    auto s = cell_state(spec, id);
    return Cell{id, s.mass(), s.defective};
}

ExtMass mass_of(const MeasureSpec& spec, const CompactOpen& u) {
    ExtMass total;
    for (const auto& c : u.cells) total = total + cell_state(spec, c).mass();
    return total;
}

std::optional<MassLaw> mass_law(const MeasureSpec& spec) {
    const auto& node = spec.node();
    if (auto cnt = piece_count(spec)) {
        MassLaw law;
        for (const auto& c : pieces(spec, *cnt)) law.prefix.push_back(c.mass);
        return law;
    }
    if (auto p = get<PAdicHaarData>(node)) {
        MassLaw law;
        law.prefix = {ExtMass(1)};
        law.block = {ExtMass(Rational(static_cast<long>(p->p - 1)))};
        law.ratio = Rational(static_cast<long>(p->p));
        return law;
    }
    if (auto c = get<CFData>(node)) {
        MassLaw law;
        std::size_t n0 = std::max(c->f_sizes.size(), c->c_sizes.size());
        for (const auto& cell : pieces(spec, n0 + 1)) law.prefix.push_back(cell.mass);
        law.block = {law.prefix.back()};
        law.prefix.pop_back();
        law.ratio = Rational(1, c->c_sizes.back());
        return law;
    }
    if (auto sc = get<ScaledData>(node)) {
        auto law = mass_law(sc->inner);
        if (!law) return law;
        for (auto& m : law->prefix) m = m * sc->factor;
        for (auto& m : law->block) m = m * sc->factor;
        return law;
    }
    if (auto du = get<DisjointUnionData>(node)) {
        MassLaw law;
        for (const auto& c : pieces(spec, node.explicit_index.size())) law.prefix.push_back(c.mass);
        for (const auto& c : pieces(*du->tail_base, node.base_pieces)) law.block.push_back(c.mass * du->tail_first);
        law.ratio = du->tail_ratio;
        return law;
    }
    if (auto pc = get<ProductCountingData>(node)) {
        MassLaw law;
        for (const auto& c : pieces(spec, 2 * pc->weight_cycle.size() * node.base_pieces)) law.block.push_back(c.mass);
        law.ratio = 1;
        return law;
    }
    if (auto cp = get<CompactifiedData>(node)) return mass_law(cp->inner);
    return std::nullopt;
}

std::optional<ExtMass> tail_mass(const MeasureSpec& spec, const PieceClass& cls) {
    if (cls.explicit_list) {
        ExtMass sum;
        for (auto i : *cls.explicit_list)
            if (auto s = root_state(spec, i)) sum = sum + s->mass();
        return sum;
    }
    auto law = mass_law(spec);
    if (!law) return std::nullopt;
    ExtMass sum;
    for (std::size_t i = 0; i < law->prefix.size(); ++i)
        if (cls.contains(i)) sum = sum + law->prefix[i];
    if (law->block.empty()) return sum;
    const std::size_t p = law->prefix.size(), b = law->block.size();
    const std::size_t period = cls.modulus / std::gcd(b, cls.modulus);
    Rational weighted = 0;
    bool any = false;
    for (std::size_t k = 0; k < period; ++k) {
        ExtMass sk;
        for (std::size_t j = 0; j < b; ++j)
            if (cls.contains(p + k * b + j)) sk = sk + law->block[j];
        if (sk.is_infinite()) return ExtMass::infinite();
        if (sk.value().is_zero()) continue;
        any = true;
        weighted += pow(law->ratio, static_cast<long>(k)) * sk.value();
    }
    if (!any) return sum;
    if (law->ratio >= Rational(1)) return ExtMass::infinite();
    Rational denom = Rational(1) - pow(law->ratio, static_cast<long>(period));
    return sum + ExtMass(weighted / denom);
}

ExtMass total_mass(const MeasureSpec& spec) {
    const auto& node = spec.node();
    if (auto b = get<BratteliData>(node); b && b->mode == BratteliMode::DistinguishedClass) {
        Rational sum = 0;
        for (std::size_t v = 0; v < b->matrix.size(); ++v) {
            if (b->defective[v]) return ExtMass::infinite();
            sum += b->x[v];
        }
        return sum;
    }
    if (auto sc = get<ScaledData>(node)) return total_mass(sc->inner) * sc->factor;
    if (auto cp = get<CompactifiedData>(node)) return total_mass(cp->inner);
    auto t = tail_mass(spec, PieceClass::all());
    if (!t) throw DomainError("total mass unavailable for " + to_string(spec.kind()));
    return *t;
}

DefectiveDescriptor defective_descriptor(const MeasureSpec& spec) {
    const auto& node = spec.node();
    if (auto b = get<BratteliData>(node)) {
        if (b->mode == BratteliMode::DistinguishedClass) return {};
        bool any = std::any_of(b->defective.begin(), b->defective.end(), [](bool d) { return d; });
        return any ? DefectiveDescriptor::cantor_set() : DefectiveDescriptor::empty();
    }
    if (auto sc = get<ScaledData>(node)) return defective_descriptor(sc->inner);
    if (auto rs = get<RestrictedData>(node)) {
        for (const auto& c : rs->within.cells)
            if (cell_state(rs->inner, c).defective) return DefectiveDescriptor::cantor_set();
        return {};
    }
    if (auto du = get<DisjointUnionData>(node)) {
        DefectiveDescriptor d;
        for (const auto& c : du->components) d = DefectiveDescriptor::disjoint_union(d, defective_descriptor(c));
        return d;
    }
    if (auto cp = get<CompactifiedData>(node)) {
        auto d = defective_descriptor(cp->inner);
        if (total_mass(cp->inner).is_finite()) return d;
        std::size_t points = 0;
        for (const auto& c : cp->classes.classes) {
            auto t = cp->classes.classes.size() == 1 ? std::optional<ExtMass>(ExtMass::infinite())
                                                     : tail_mass(cp->inner, c);
            if (t && t->is_infinite()) ++points;
        }
        return DefectiveDescriptor::disjoint_union(d, DefectiveDescriptor::finite_points(points));
    }
    return {};
}

bool is_compact(const MeasureSpec& spec) {
    if (spec.kind() == SpecKind::Compactified) return true;
    return piece_count(spec).has_value() && total_mass(spec).is_finite();
}

std::size_t product_piece_index(long z, std::size_t s, std::size_t m) {
    std::size_t t = z > 0 ? static_cast<std::size_t>(2 * z - 1) : static_cast<std::size_t>(-2 * z);
    return t * m + s;
}

long product_piece_z(std::size_t index, std::size_t m) { return zigzag(index / m); }

CompactOpen subtract(const MeasureSpec& spec, const CompactOpen& region, const CompactOpen& cut) {
    std::vector<CellId> out;
    std::vector<CellId> todo(region.cells.rbegin(), region.cells.rend());
    while (!todo.empty()) {
        CellId c = std::move(todo.back());
        todo.pop_back();
        bool removed = false, split = false;
        for (const auto& x : cut.cells) {
            if (x == c || x.is_ancestor_of(c)) removed = true;
            else if (c.is_ancestor_of(x)) split = true;
        }
        if (removed) continue;
        if (!split) {
            out.push_back(std::move(c));
            continue;
        }
        auto n = child_states(cell_state(spec, c)).size();
        for (std::size_t i = n; i-- > 0;) todo.push_back(c.child(static_cast<std::uint32_t>(i)));
    }
    return CompactOpen(std::move(out), region.infinite_mass);
}

// ---------------------------------------------------------------------------

namespace fixtures {

MeasureSpec dyadic() { return MeasureSpec::bernoulli({Rational(1, 2), Rational(1, 2)}); }

MeasureSpec dyadic_forest() { return MeasureSpec::disjoint_union({}, dyadic(), Rational(1, 2), Rational(1, 2)); }

MeasureSpec dyadic_forest_balanced() {
    auto halves = MeasureSpec::restricted(dyadic(), CompactOpen({CellId{0, {0}}, CellId{0, {1}}}));
    return MeasureSpec::disjoint_union({}, halves, Rational(1, 2), Rational(1, 2));
}

MeasureSpec dyadic_forest_quarters() {
    auto q = MeasureSpec::scaled(Rational(1, 4), dyadic());
    return MeasureSpec::disjoint_union({q, q}, dyadic(), Rational(1, 4), Rational(1, 2));
}

BratteliData bratteli_fn(long n, BratteliMode mode) {
    BratteliData b;
    b.matrix = {{2, 1, 1}, {0, n, 1}, {0, 1, n}};
    b.lambda = n + 1;
    b.x = {Rational(1, n), Rational(n - 1, 2 * n), Rational(n - 1, 2 * n)};
    b.defective = {false, false, false};
    b.mode = mode;
    b.distinguished = {1, 2};
    return b;
}

BratteliData bratteli_infinite() {
    BratteliData b;
    b.matrix = {{5, 1, 1}, {0, 3, 1}, {0, 1, 3}};
    b.lambda = 4;
    b.x = {Rational(1), Rational(1, 2), Rational(1, 2)};
    b.defective = {true, false, false};
    b.mode = BratteliMode::FullDiagram;
    b.distinguished = {1, 2};
    return b;
}

MeasureSpec punctured_bernoulli() {
    auto ones = MeasureSpec::restricted(MeasureSpec::bernoulli({Rational(1, 3), Rational(2, 3)}),
                                        CompactOpen({CellId{0, {1}}}));
    return MeasureSpec::disjoint_union({}, ones, Rational(1), Rational(1, 3));
}

}  // namespace fixtures

}  // namespace goodmeasure
