#include <gtest/gtest.h>

#include <functional>

#include "goodmeasure/spec_io.hpp"
#include "support.hpp"

using namespace goodmeasure;
using gmtest::C;
using gmtest::R;
using gmtest::Rs;
using gmtest::U;

namespace {

MeasureSpec bern13() { return MeasureSpec::bernoulli(Rs({"1/3", "2/3"})); }

std::vector<Rational> masses(const std::vector<Cell>& cells) {
    std::vector<Rational> out;
    for (const auto& c : cells) out.push_back(c.mass.value());
    return out;
}

std::vector<std::pair<std::string, MeasureSpec>> builtin_specs() {
    return {
        {"dyadic", fixtures::dyadic()},
        {"bern13", bern13()},
        {"padic3", MeasureSpec::padic_haar(3)},
        {"padic5", MeasureSpec::padic_haar(5)},
        {"cf", MeasureSpec::cf({1}, {2, 3, 2})},
        {"cf-declared", MeasureSpec::cf({2, 8, 26}, {3, 3})},
        {"fn3-full", MeasureSpec::bratteli(fixtures::bratteli_fn(3, BratteliMode::FullDiagram))},
        {"fn4-class", MeasureSpec::bratteli(fixtures::bratteli_fn(4, BratteliMode::DistinguishedClass))},
        {"infinite-bratteli", MeasureSpec::bratteli(fixtures::bratteli_infinite())},
        {"forest", fixtures::dyadic_forest()},
        {"forest-balanced", fixtures::dyadic_forest_balanced()},
        {"forest-quarters", fixtures::dyadic_forest_quarters()},
        {"punctured", fixtures::punctured_bernoulli()},
        {"product", MeasureSpec::product_counting(fixtures::dyadic(), Rs({"1", "3"}))},
        {"scaled", MeasureSpec::scaled(R("1/4"), fixtures::dyadic())},
        {"one-point", MeasureSpec::compactified(fixtures::dyadic_forest(), CompactificationSpec::one_point())},
    };
}

}  // namespace

TEST(Pieces, Examples) {
    EXPECT_EQ(masses(pieces(fixtures::dyadic_forest(), 3)), Rs({"1/2", "1/4", "1/8"}));
    auto ball = pieces(MeasureSpec::padic_haar(3), 1);
    ASSERT_EQ(ball.size(), 1u);
    EXPECT_EQ(ball[0].mass, ExtMass(1));
    EXPECT_EQ(masses(pieces(bern13(), 5)), Rs({"1"}));
    EXPECT_EQ(masses(pieces(MeasureSpec::padic_haar(3), 4)), Rs({"1", "2", "6", "18"}));
}

TEST(Refine, Examples) {
    EXPECT_EQ(masses(refine(bern13(), C(0))), Rs({"1/3", "2/3"}));
    auto fn3 = MeasureSpec::bratteli(fixtures::bratteli_fn(3, BratteliMode::FullDiagram));
    auto kids = refine(fn3, C(2));
    Rational sum = 0;
    for (const auto& k : kids) sum += k.mass.value();
    EXPECT_EQ(sum, R("1/3"));
    EXPECT_EQ(kids.size(), 4u);
    auto five = refine(MeasureSpec::padic_haar(5), C(0));
    EXPECT_EQ(masses(five), std::vector<Rational>(5, R("1/5")));
    EXPECT_THROW(refine(bern13(), C(0, {2})), DomainError);
    EXPECT_THROW(refine(bern13(), C(1)), DomainError);
}

TEST(Refine, CFBlocksAndCylinders) {
    auto cf = MeasureSpec::cf({1}, {2, 3, 2});
    EXPECT_EQ(masses(pieces(cf, 3)), Rs({"1/2", "1/3", "1/6"}));
    EXPECT_EQ(masses(refine(cf, C(0))), Rs({"1/2"}));
    EXPECT_EQ(masses(refine(cf, C(0, {0}))), Rs({"1/6", "1/6", "1/6"}));
    EXPECT_EQ(masses(refine(cf, C(1))), Rs({"1/6", "1/6"}));
    EXPECT_EQ(total_mass(cf), ExtMass(R("7/6")));
    EXPECT_THROW(MeasureSpec::cf({2, 5}, {3}), ValidationError);
    EXPECT_THROW(MeasureSpec::cf({1}, {1}), ValidationError);
}

TEST(MassOf, Examples) {
    EXPECT_EQ(mass_of(bern13(), U({C(0, {0}), C(0, {1, 0})})), ExtMass(R("5/9")));
    EXPECT_EQ(mass_of(bern13(), CompactOpen{}), ExtMass(0));
    EXPECT_EQ(mass_of(fixtures::dyadic_forest(), U({C(0), C(1)})), ExtMass(R("3/4")));
}

TEST(CompactOpen, RejectsNesting) {
    EXPECT_THROW(U({C(0, {1}), C(0, {1, 0})}), DomainError);
    auto u = U({C(1), C(0, {1}), C(0, {0})});
    EXPECT_EQ(u.cells.front(), C(0, {0}));
    EXPECT_TRUE(U({C(0, {1, 1})}).inside(U({C(0, {1})})));
    EXPECT_FALSE(U({C(0, {1})}).disjoint_from(U({C(0, {1, 0})})));
}

TEST(TailMass, Examples) {
    auto forest = fixtures::dyadic_forest();
    EXPECT_EQ(tail_mass(forest, PieceClass::residue(2, {0})), ExtMass(R("2/3")));
    EXPECT_EQ(tail_mass(forest, PieceClass::residue(2, {1})), ExtMass(R("1/3")));
    EXPECT_EQ(tail_mass(forest, PieceClass::all()), ExtMass(1));
    auto balanced = fixtures::dyadic_forest_balanced();
    EXPECT_EQ(tail_mass(balanced, PieceClass::residue(2, {0})), ExtMass(R("1/2")));
    EXPECT_EQ(tail_mass(balanced, PieceClass::residue(2, {1})), ExtMass(R("1/2")));
    EXPECT_EQ(tail_mass(forest, PieceClass::listed({0, 2})), ExtMass(R("5/8")));
    auto cls = MeasureSpec::bratteli(fixtures::bratteli_fn(3, BratteliMode::DistinguishedClass));
    EXPECT_FALSE(tail_mass(cls, PieceClass::residue(2, {0})).has_value());
}

TEST(TotalMass, Examples) {
    EXPECT_EQ(total_mass(bern13()), ExtMass(1));
    EXPECT_TRUE(total_mass(MeasureSpec::product_counting(fixtures::dyadic(), Rs({"1"}))).is_infinite());
    EXPECT_EQ(total_mass(MeasureSpec::scaled(R("1/4"), fixtures::dyadic())), ExtMass(R("1/4")));
    EXPECT_EQ(total_mass(fixtures::dyadic_forest_quarters()), ExtMass(1));
    EXPECT_EQ(total_mass(fixtures::punctured_bernoulli()), ExtMass(1));
    EXPECT_EQ(total_mass(MeasureSpec::bratteli(fixtures::bratteli_fn(4, BratteliMode::DistinguishedClass))),
              ExtMass(1));
    EXPECT_TRUE(total_mass(MeasureSpec::bratteli(fixtures::bratteli_infinite())).is_infinite());
    EXPECT_TRUE(total_mass(MeasureSpec::padic_haar(2)).is_infinite());
}

TEST(DefectiveDescriptor, Examples) {
    EXPECT_TRUE(defective_descriptor(MeasureSpec::product_counting(fixtures::dyadic(), Rs({"1"}))).is_empty());
    EXPECT_EQ(defective_descriptor(MeasureSpec::bratteli(fixtures::bratteli_infinite())),
              DefectiveDescriptor::cantor_set());
    EXPECT_TRUE(defective_descriptor(bern13()).is_empty());
    auto infinite_class = fixtures::bratteli_infinite();
    infinite_class.mode = BratteliMode::DistinguishedClass;
    auto omega = MeasureSpec::compactified(MeasureSpec::bratteli(infinite_class), CompactificationSpec::one_point());
    EXPECT_EQ(defective_descriptor(omega), DefectiveDescriptor::finite_points(1));
    auto two = DefectiveDescriptor::disjoint_union(DefectiveDescriptor::finite_points(1),
                                                   DefectiveDescriptor::finite_points(1));
    EXPECT_EQ(two, DefectiveDescriptor::finite_points(2));
    EXPECT_EQ(DefectiveDescriptor::disjoint_union(DefectiveDescriptor::cantor_set(), DefectiveDescriptor::cantor_set()),
              DefectiveDescriptor::cantor_set());
}

TEST(Bratteli, RejectsBrokenEigenvector) {
    auto b = fixtures::bratteli_fn(3, BratteliMode::FullDiagram);
    b.x[0] = R("1/2");
    EXPECT_THROW(MeasureSpec::bratteli(b), ValidationError);
    auto c = fixtures::bratteli_fn(3, BratteliMode::DistinguishedClass);
    c.distinguished = {0};
    EXPECT_THROW(MeasureSpec::bratteli(c), ValidationError);
}

TEST(Bratteli, DistinguishedClassEnumeration) {
    auto spec = MeasureSpec::bratteli(fixtures::bratteli_fn(3, BratteliMode::DistinguishedClass));
    EXPECT_FALSE(piece_count(spec).has_value());
    auto ps = pieces(spec, 6);
    EXPECT_EQ(masses(ps), Rs({"1/3", "1/3", "1/12", "1/12", "1/48", "1/48"}));
    Rational prefix = 0;
    for (const auto& c : pieces(spec, 40)) prefix += c.mass.value();
    EXPECT_LT(prefix, Rational(1));
    EXPECT_GT(prefix, R("97/100"));
}

TEST(Bratteli, InfiniteDiagram) {
    auto spec = MeasureSpec::bratteli(fixtures::bratteli_infinite());
    auto ps = pieces(spec, 3);
    EXPECT_TRUE(ps[0].defective);
    EXPECT_TRUE(ps[0].mass.is_infinite());
    auto kids = refine(spec, C(0));
    EXPECT_EQ(kids.size(), 7u);
    EXPECT_TRUE(kids[0].defective);
    EXPECT_EQ(kids[6].mass, ExtMass(R("1/8")));
}

TEST(ProductCounting, ZigzagOrder) {
    auto spec = MeasureSpec::product_counting(fixtures::dyadic(), Rs({"1", "3"}));
    EXPECT_EQ(masses(pieces(spec, 5)), Rs({"1", "3", "3", "1", "1"}));
    EXPECT_EQ(product_piece_z(1, 1), 1);
    EXPECT_EQ(product_piece_z(2, 1), -1);
    EXPECT_EQ(product_piece_index(-2, 0, 1), 4u);
    EXPECT_TRUE(total_mass(spec).is_infinite());
}

TEST(Subtract, SplitsAncestors) {
    auto spec = fixtures::dyadic();
    auto rest = subtract(spec, U({C(0)}), U({C(0, {1, 0})}));
    EXPECT_EQ(rest, U({C(0, {0}), C(0, {1, 1})}));
    EXPECT_EQ(mass_of(spec, rest), ExtMass(R("3/4")));
}

TEST(Invariants, MassConservationToDepthFive) {
    for (const auto& [name, spec] : builtin_specs()) {
        std::function<void(const CellId&, std::size_t)> walk = [&](const CellId& id, std::size_t left) {
            auto cell = cell_of(spec, id);
            auto kids = refine(spec, id);
            ASSERT_FALSE(kids.empty()) << name;
            if (!cell.defective) {
                Rational sum = 0;
                for (const auto& k : kids) {
                    ASSERT_FALSE(k.defective) << name;
                    ASSERT_GT(k.mass.value(), Rational(0)) << name;
                    sum += k.mass.value();
                }
                ASSERT_EQ(sum, cell.mass.value()) << name << " at " << id.str();
            }
            if (left == 0) return;
            for (std::size_t i = 0; i < kids.size() && i < 3; ++i) walk(kids[i].id, left - 1);
        };
        for (const auto& p : pieces(spec, 3)) walk(p.id, 5);
    }
}

TEST(Invariants, Determinism) {
    for (const auto& [name, spec] : builtin_specs()) {
        auto a = pieces(spec, 6), b = pieces(spec, 6);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].id, b[i].id);
            EXPECT_EQ(a[i].mass, b[i].mass) << name;
        }
    }
}

TEST(SpecJson, RoundTripIsBitExact) {
    for (const auto& [name, spec] : builtin_specs()) {
        auto text = canonical_dump(spec);
        auto back = spec_from_json(Json::parse(text));
        EXPECT_EQ(canonical_dump(back), text) << name;
        EXPECT_EQ(spec_digest(back), spec_digest(spec)) << name;
        EXPECT_EQ(spec_digest(spec).size(), 16u);
    }
}

TEST(SpecJson, ValidatesOnLoad) {
    EXPECT_THROW(spec_from_json(Json::parse(R"({"type":"Bernoulli","weights":["1/2","1/3"]})")), ValidationError);
    EXPECT_THROW(spec_from_json(Json::parse(R"({"type":"Nope"})")), ValidationError);
    EXPECT_THROW(spec_from_json(Json::parse(R"({"type":"PAdicHaar","p":4})")), ValidationError);
    auto ok = spec_from_json(Json::parse(R"({"type":"Bernoulli","weights":[{"num":"1","den":"3"},"2/3"]})"));
    EXPECT_EQ(ok.kind(), SpecKind::Bernoulli);
}
