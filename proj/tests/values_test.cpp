#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "goodmeasure/spec_io.hpp"
#include "goodmeasure/values.hpp"
#include "support.hpp"

using namespace goodmeasure;
using gmtest::C;
using gmtest::R;
using gmtest::Rs;
using gmtest::U;

namespace {

MeasureSpec bern13() { return MeasureSpec::bernoulli(Rs({"1/3", "2/3"})); }

std::vector<Rational> sixteenths() {
    std::vector<Rational> out;
    for (long k = 0; k <= 16; ++k) out.emplace_back(k, 16);
    return out;
}

}  // namespace

TEST(EnumerateValues, DyadicDepthTwo) {
    auto s = enumerate_values(fixtures::dyadic(), 2, 1, ExtMass(1));
    EXPECT_EQ(s.values(), Rs({"0", "1/4", "1/2", "3/4", "1"}));
    EXPECT_EQ(s.cells().size(), 4u);
}

TEST(EnumerateValues, BernoulliThirds) {
    auto s = enumerate_values(bern13(), 2, 1, ExtMass(1));
    EXPECT_EQ(s.values(), Rs({"0", "1/9", "2/9", "1/3", "4/9", "5/9", "2/3", "7/9", "8/9", "1"}));
    EXPECT_TRUE(s.contains(R("5/9")));
    EXPECT_FALSE(s.contains(R("1/2")));
}

TEST(EnumerateValues, SmallBound) {
    auto s = enumerate_values(bern13(), 1, 1, ExtMass(R("1/4")));
    EXPECT_EQ(s.values(), Rs({"0"}));
}

TEST(EnumerateValues, ForestHorizon) {
    auto s = enumerate_values(fixtures::dyadic_forest(), 0, 3, ExtMass::infinite());
    EXPECT_EQ(s.values(), Rs({"0", "1/8", "1/4", "3/8", "1/2", "5/8", "3/4", "7/8"}));
}

TEST(EnumerateValues, BudgetIsEnforced) {
    EXPECT_THROW(enumerate_values(fixtures::dyadic(), 12, 1, ExtMass(1), 1000), BudgetError);
}

TEST(EnumerateValues, WitnessesAreSound) {
    std::vector<MeasureSpec> specs{fixtures::dyadic(), bern13(), MeasureSpec::padic_haar(3),
                                   MeasureSpec::cf({1}, {2, 3, 2}), fixtures::dyadic_forest_quarters(),
                                   MeasureSpec::bratteli(fixtures::bratteli_fn(4, BratteliMode::DistinguishedClass))};
    for (const auto& spec : specs) {
        for (std::size_t depth = 0; depth <= 3; ++depth) {
            auto s = enumerate_values(spec, depth, 3, ExtMass::infinite(), 100'000'000);
            for (const auto& v : s.values()) {
                auto w = s.witness(v);
                ASSERT_TRUE(w.has_value());
                EXPECT_EQ(mass_of(spec, *w), ExtMass(v)) << canonical_dump(spec) << " depth " << depth;
            }
            EXPECT_FALSE(s.witness(R("-1")).has_value());
        }
    }
}

TEST(EnumerateValues, MonotoneInDepth) {
    std::vector<MeasureSpec> specs{fixtures::dyadic(), bern13(), MeasureSpec::padic_haar(5),
                                   MeasureSpec::cf({2, 8, 26}, {3, 3})};
    for (const auto& spec : specs) {
        std::vector<Rational> prev;
        for (std::size_t depth = 0; depth <= 4; ++depth) {
            auto cur = enumerate_values(spec, depth, 1, ExtMass::infinite(), 100'000'000).values();
            EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end())) << depth;
            prev = cur;
        }
    }
}

TEST(EnumerateValues, ValuesLieInGroup) {
    std::vector<MeasureSpec> specs{bern13(), MeasureSpec::padic_haar(3), MeasureSpec::cf({1}, {2, 3, 2}),
                                   fixtures::dyadic_forest(), fixtures::punctured_bernoulli(),
                                   MeasureSpec::bratteli(fixtures::bratteli_fn(4, BratteliMode::DistinguishedClass)),
                                   MeasureSpec::bratteli(fixtures::bratteli_fn(6, BratteliMode::FullDiagram))};
    for (const auto& spec : specs) {
        auto g = value_group(spec);
        ASSERT_TRUE(g.has_value()) << canonical_dump(spec);
        auto sample = enumerate_values(spec, 3, 4, ExtMass::infinite(), 100'000'000);
        for (const auto& v : sample.values())
            EXPECT_TRUE(g->contains(v)) << canonical_dump(spec) << " value " << v.str();
    }
}

TEST(SubsetSums, Examples) {
    EXPECT_EQ(subset_sums(Rs({"1/2", "1/3"}), ExtMass(1)), Rs({"0", "1/3", "1/2", "5/6"}));
    EXPECT_EQ(subset_sums({}, ExtMass(1)), Rs({"0"}));
    auto w = subset_sum_witness(Rs({"1/4", "1/3", "1/6"}), R("1/2"));
    ASSERT_TRUE(w.has_value());
    EXPECT_EQ(*w, (std::vector<std::size_t>{1, 2}));
    EXPECT_FALSE(subset_sum_witness(Rs({"1/4", "1/3"}), R("1/2")).has_value());
}

TEST(ValueGroup, Examples) {
    EXPECT_EQ(*value_group(MeasureSpec::padic_haar(7)), DivisibleGroup(1, {7}));
    EXPECT_EQ(*value_group(bern13()), DivisibleGroup(1, {3}));
    auto f4 = value_group(MeasureSpec::bratteli(fixtures::bratteli_fn(4, BratteliMode::DistinguishedClass)));
    ASSERT_TRUE(f4.has_value());
    EXPECT_EQ(f4->scale(), R("3/8"));
    EXPECT_EQ(f4->primes(), std::vector<Prime>{5});
    EXPECT_EQ(*value_group(MeasureSpec::scaled(R("1/3"), fixtures::dyadic())), DivisibleGroup(R("1/3"), {2}));
    EXPECT_EQ(*value_group(fixtures::dyadic_forest()), DivisibleGroup(1, {2}));
    EXPECT_EQ(*value_group(MeasureSpec::cf({1}, {2})), DivisibleGroup(1, {2}));
}

TEST(GoodValueSet, Examples) {
    auto padic = good_value_set(MeasureSpec::padic_haar(5));
    ASSERT_TRUE(padic.has_value());
    EXPECT_EQ(padic->group, DivisibleGroup(1, {5}));
    EXPECT_TRUE(padic->bound.is_infinite());
    auto dyadic = good_value_set(fixtures::dyadic());
    ASSERT_TRUE(dyadic.has_value());
    EXPECT_TRUE(dyadic->contains(Rational(1)));
    EXPECT_TRUE(dyadic->contains(R("5/8")));
    EXPECT_FALSE(dyadic->contains(R("1/3")));
    EXPECT_FALSE(good_value_set(bern13()).has_value());
}

TEST(ProductValueClosure, Examples) {
    auto half = Rs({"0", "1/2", "1"});
    EXPECT_EQ(product_value_closure(half, half, 1, ExtMass(1)), Rs({"0", "1/4", "1/2", "1"}));
    EXPECT_EQ(product_value_closure(half, half, 2, ExtMass(1)), Rs({"0", "1/4", "1/2", "3/4", "1"}));
}

TEST(ProductValueClosure, MatchesProductMeasure) {
    auto quarters = enumerate_values(fixtures::dyadic(), 2, 1, ExtMass(1)).values();
    auto closure = product_value_closure(quarters, quarters, 16, ExtMass(1));
    auto product = enumerate_values(MeasureSpec::bernoulli(Rs({"1/4", "1/4", "1/4", "1/4"})), 2, 1, ExtMass(1));
    EXPECT_EQ(closure, sixteenths());
    EXPECT_EQ(product.values(), sixteenths());
}

TEST(CompactifiedValues, ContainsClassMassesAndWhole) {
    auto comp = CompactificationSpec{{PieceClass::residue(2, {0}), PieceClass::residue(2, {1})}};
    auto vals = compactified_values(fixtures::dyadic_forest(), comp, 1, 4);
    std::set<Rational> s(vals.begin(), vals.end());
    EXPECT_TRUE(s.count(R("2/3")));
    EXPECT_TRUE(s.count(R("1/3")));
    EXPECT_TRUE(s.count(Rational(1)));
    EXPECT_TRUE(s.count(R("1/4")));
    for (const auto& v : vals) {
        EXPECT_GE(v, Rational(0));
        EXPECT_LE(v, Rational(1));
    }
}

TEST(SubsetSums, LargestBelowBound) {
    EXPECT_EQ(max_subset_sum(Rs({"1/2", "1/4", "1/8"}), R("2/3")), R("5/8"));
    EXPECT_EQ(max_subset_sum(Rs({"1/2", "1/3"}), R("5/6")), R("5/6"));
    EXPECT_EQ(max_subset_sum(Rs({"1/2"}), R("1/3")), Rational(0));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        std::vector<Rational> ms;
        for (int k = 0; k < 6; ++k) ms.push_back(gmtest::random_rational(rng, 20, true));
        Rational bound = gmtest::random_rational(rng, 20, true);
        auto all = subset_sums(ms, ExtMass(bound));
        EXPECT_EQ(max_subset_sum(ms, bound), all.back());
    }
}
