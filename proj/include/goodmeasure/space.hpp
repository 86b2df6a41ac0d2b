#pragma once

/**
 * @file space.hpp
 * @brief Locally compact Cantor sets carrying full non-atomic measures,
 *        presented as lazily refinable weighted forests.
 *
 * A space is a countable disjoint union of compact pieces X_0, X_1, ...  Each
 * piece is the root of a tree of compact open cylinders; a cell is addressed by
 * (piece, path) where path lists child indices from the root.  Cells of
 * infinite mass are "defective" and carry points of the defective set.
 *
 * MeasureSpec is a closed family of descriptions.  Leaves (Bernoulli,
 * StationaryBratteli, CF, PAdicHaar) know how to refine their cells; the
 * combinators (Scaled, Restricted, DisjointUnion, ProductCounting,
 * Compactified) only rearrange and rescale piece roots.
 *
 * Piece enumeration order is fixed and part of the contract: every downstream
 * result cites cells by (piece, path).
 */

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "goodmeasure/exactnum.hpp"

namespace goodmeasure {

/// A spec violated one of its construction invariants.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct CellId {
    std::size_t piece = 0;
    std::vector<std::uint32_t> path;

    bool is_ancestor_of(const CellId& other) const;  // strict
    CellId child(std::uint32_t i) const;
    std::string str() const;  // "piece:path", e.g. "0:[10]"

    friend bool operator==(const CellId&, const CellId&) = default;
    friend std::strong_ordering operator<=>(const CellId&, const CellId&) = default;
};

struct Cell {
    CellId id;
    ExtMass mass;
    bool defective = false;
};

/// Finite antichain of cells, kept sorted.
struct CompactOpen {
    std::vector<CellId> cells;
    bool infinite_mass = false;

    CompactOpen() = default;
    /// Sorts, removes duplicates and rejects ancestor/descendant pairs.
    explicit CompactOpen(std::vector<CellId> cells, bool infinite_mass = false);

    bool empty() const { return cells.empty(); }
    /// True when every cell of this set lies inside (or equals) some cell of outer.
    bool inside(const CompactOpen& outer) const;
    bool disjoint_from(const CompactOpen& other) const;
    std::string str() const;

    friend bool operator==(const CompactOpen&, const CompactOpen&) = default;
};

/// Homeomorphism type of a defective set at the level of a small taxonomy:
/// empty, finitely many points, a Cantor set, or a Cantor set plus finitely
/// many points.  Disjoint unions are flattened, so equality of canonical forms
/// is the homeomorphism test.
class DefectiveDescriptor {
public:
    static DefectiveDescriptor empty() { return {}; }
    static DefectiveDescriptor finite_points(std::size_t n);
    static DefectiveDescriptor cantor_set();
    static DefectiveDescriptor disjoint_union(const DefectiveDescriptor& a, const DefectiveDescriptor& b);

    bool is_empty() const { return !cantor_ && points_ == 0; }
    bool has_cantor_part() const { return cantor_; }
    std::size_t isolated_points() const { return points_; }
    std::string str() const;

    friend bool operator==(const DefectiveDescriptor&, const DefectiveDescriptor&) = default;

private:
    bool cantor_ = false;
    std::size_t points_ = 0;
};

/// Set of piece indices: a union of residue classes mod `modulus`, or an explicit finite list.
struct PieceClass {
    std::size_t modulus = 1;
    std::vector<std::size_t> residues{0};
    std::optional<std::vector<std::size_t>> explicit_list;

    static PieceClass all() { return {}; }
    static PieceClass residue(std::size_t modulus, std::vector<std::size_t> residues);
    static PieceClass listed(std::vector<std::size_t> indices);

    bool contains(std::size_t piece) const;
    bool is_infinite() const { return !explicit_list && !residues.empty(); }
    std::string str() const;

    friend bool operator==(const PieceClass&, const PieceClass&) = default;
};

/// Finite-remainder compactification: one remainder point per class of pieces.
struct CompactificationSpec {
    std::vector<PieceClass> classes;

    /// Checks k >= 1 infinite residue classes partitioning the piece indices.
    void validate() const;
    std::size_t remainder_points() const { return classes.size(); }

    static CompactificationSpec one_point() { return {{PieceClass::all()}}; }

    friend bool operator==(const CompactificationSpec&, const CompactificationSpec&) = default;
};

class MeasureSpec;
namespace detail {
struct SpecNode;
}

enum class BratteliMode { FullDiagram, DistinguishedClass };

struct BernoulliData {
    std::vector<Rational> weights;
};

/// Stationary Bratteli diagram.  `matrix` is A = F^T: a cell at vertex v on
/// level n has A[v][w] children at vertex w on level n + 1.  Finite cells at
/// vertex v on level n have mass x_v * lambda^-n.  Vertices flagged defective
/// carry infinite mass.
struct BratteliData {
    std::vector<std::vector<long>> matrix;
    long lambda = 1;
    std::vector<Rational> x;
    std::vector<bool> defective;
    BratteliMode mode = BratteliMode::FullDiagram;
    /// Distinguished class (DistinguishedClass mode only), ascending.
    std::vector<std::size_t> distinguished;
};

/// (C,F)-construction by cardinalities.  f_sizes[0] = |F_1|; further |F_n| are
/// either declared or continue with the last declared slack
/// |F_{n+1}| - |F_n| |C_{n+1}| (2 if none is declared).  |C_n| beyond the
/// declared prefix repeat the last value.
struct CFData {
    std::vector<long> f_sizes;
    std::vector<long> c_sizes;
};

struct PAdicHaarData {
    Prime p = 2;
};

struct ScaledData;
struct RestrictedData;
struct DisjointUnionData;
struct ProductCountingData;
struct CompactifiedData;

enum class SpecKind {
    Bernoulli,
    StationaryBratteli,
    CF,
    PAdicHaar,
    Scaled,
    Restricted,
    DisjointUnion,
    ProductCounting,
    Compactified
};

std::string to_string(SpecKind k);

class MeasureSpec {
public:
    static MeasureSpec bernoulli(std::vector<Rational> weights);
    static MeasureSpec bratteli(BratteliData data);
    static MeasureSpec cf(std::vector<long> f_sizes, std::vector<long> c_sizes);
    static MeasureSpec padic_haar(Prime p);
    static MeasureSpec scaled(Rational factor, MeasureSpec inner);
    static MeasureSpec restricted(MeasureSpec inner, CompactOpen within);
    /// Explicit components first, then (optional) tail components
    /// scaled(first * ratio^k, base) for k = 0, 1, ...
    static MeasureSpec disjoint_union(std::vector<MeasureSpec> components,
                                      std::optional<MeasureSpec> tail_base = std::nullopt,
                                      Rational tail_first = 1, Rational tail_ratio = 1);
    /// inner x Z with weight(z) = weight_cycle[z mod len].
    static MeasureSpec product_counting(MeasureSpec inner, std::vector<Rational> weight_cycle);
    static MeasureSpec compactified(MeasureSpec inner, CompactificationSpec classes);

    SpecKind kind() const;
    const detail::SpecNode& node() const { return *node_; }
    const std::shared_ptr<const detail::SpecNode>& node_ptr() const { return node_; }

    const BernoulliData* as_bernoulli() const;
    const BratteliData* as_bratteli() const;
    const CFData* as_cf() const;
    const PAdicHaarData* as_padic() const;
    const ScaledData* as_scaled() const;
    const RestrictedData* as_restricted() const;
    const DisjointUnionData* as_disjoint_union() const;
    const ProductCountingData* as_product() const;
    const CompactifiedData* as_compactified() const;

private:
    explicit MeasureSpec(std::shared_ptr<const detail::SpecNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const detail::SpecNode> node_;
};

struct ScaledData {
    Rational factor;
    MeasureSpec inner;
};

struct RestrictedData {
    MeasureSpec inner;
    CompactOpen within;
};

struct DisjointUnionData {
    std::vector<MeasureSpec> components;
    std::optional<MeasureSpec> tail_base;
    Rational tail_first = 1;
    Rational tail_ratio = 1;
};

struct ProductCountingData {
    MeasureSpec inner;
    std::vector<Rational> weight_cycle;
};

struct CompactifiedData {
    MeasureSpec inner;
    CompactificationSpec classes;
};

// ---------------------------------------------------------------------------
// Cell states: what a leaf needs to know to refine a cell.

struct CellState {
    std::shared_ptr<const detail::SpecNode> leaf;
    Rational factor = 1;  // accumulated scaling from combinators
    ExtMass local_mass;   // mass before scaling
    long vertex = -1;     // Bratteli vertex
    long level = 0;       // Bratteli / CF level, p-adic annulus index
    long block = 0;       // > 0: a block root splitting into `block` equal children
    bool defective = false;

    ExtMass mass() const { return defective ? ExtMass::infinite() : local_mass * factor; }
};

/// Root of piece `index`, or nullopt past the end of a finite spec.
std::optional<CellState> root_state(const MeasureSpec& spec, std::size_t index);
std::vector<CellState> child_states(const CellState& state);
/// Throws DomainError for unknown cells.
CellState cell_state(const MeasureSpec& spec, const CellId& id);
/// Every child/parent mass ratio that can occur below `state`; nullopt for defective cells.
std::optional<std::vector<Rational>> descendant_ratios(const CellState& state);
/// Group generated by the masses of the cell and all of its descendants.
std::optional<DivisibleGroup> subtree_group(const CellState& state);

// ---------------------------------------------------------------------------
// Operations

/// nullopt when the spec has infinitely many pieces.
std::optional<std::size_t> piece_count(const MeasureSpec& spec);
std::vector<Cell> pieces(const MeasureSpec& spec, std::size_t count);
std::vector<Cell> refine(const MeasureSpec& spec, const CellId& cell);
Cell cell_of(const MeasureSpec& spec, const CellId& id);
ExtMass mass_of(const MeasureSpec& spec, const CompactOpen& u);
/// Exact sum of piece masses over a class; nullopt ("Unknown") when no closed form is available.
std::optional<ExtMass> tail_mass(const MeasureSpec& spec, const PieceClass& cls);
ExtMass total_mass(const MeasureSpec& spec);
DefectiveDescriptor defective_descriptor(const MeasureSpec& spec);
/// Finitely many pieces and finite mass.
bool is_compact(const MeasureSpec& spec);

/// Piece masses as an explicit prefix followed by a periodic block repeated
/// with a geometric factor: mass(prefix.size() + k*block.size() + i) = block[i] * ratio^k.
struct MassLaw {
    std::vector<ExtMass> prefix;
    std::vector<ExtMass> block;
    Rational ratio = 1;
};
std::optional<MassLaw> mass_law(const MeasureSpec& spec);

/// Piece index of (z, inner piece s) in a ProductCounting spec whose inner spec has m pieces.
std::size_t product_piece_index(long z, std::size_t s, std::size_t m);
long product_piece_z(std::size_t index, std::size_t m);

/// Cells of `region` with `cut` removed: ancestors of cut cells are split into children.
CompactOpen subtract(const MeasureSpec& spec, const CompactOpen& region, const CompactOpen& cut);

// ---------------------------------------------------------------------------
// Built-in fixtures used by tests, scenarios and docs.

namespace fixtures {
/// Bernoulli(1/2, 1/2).
MeasureSpec dyadic();
/// Pieces X_n, n >= 1, each 2^-n * Bernoulli(1/2,1/2): masses 1/2, 1/4, ...
MeasureSpec dyadic_forest();
/// dyadic_forest with every piece split into its two halves.
MeasureSpec dyadic_forest_balanced();
/// Pieces of mass 1/4, 1/4, 1/4, 1/8, 1/16, ...
MeasureSpec dyadic_forest_quarters();
/// Incidence matrix F_N transposed, lambda = N + 1, x = (1/N, (N-1)/2N, (N-1)/2N).
BratteliData bratteli_fn(long n, BratteliMode mode);
/// A defective variant: vertex 0 is infinite with a self-loop of multiplicity 5, lambda = 4.
BratteliData bratteli_infinite();
/// Y minus the all-zero point for Bernoulli(1/3,2/3): pieces 0^n 1, n >= 0.
MeasureSpec punctured_bernoulli();
}  // namespace fixtures

}  // namespace goodmeasure
