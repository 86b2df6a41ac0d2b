#include <gtest/gtest.h>

#include "goodmeasure/goodness.hpp"
#include "goodmeasure/spec_io.hpp"
#include "support.hpp"

using namespace goodmeasure;
using gmtest::C;
using gmtest::R;
using gmtest::Rs;
using gmtest::U;

namespace {

MeasureSpec bern13() { return MeasureSpec::bernoulli(Rs({"1/3", "2/3"})); }

bool descends_from(const CompactOpen& w, const CompactOpen& region) {
    for (const auto& c : w.cells) {
        bool ok = false;
        for (const auto& r : region.cells) ok = ok || r == c || r.is_ancestor_of(c);
        if (!ok) return false;
    }
    return true;
}

}  // namespace

TEST(Carve, Examples) {
    auto r = carve(fixtures::dyadic(), U({C(0)}), R("5/8"), 4);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(*r.found, U({C(0, {0}), C(0, {1, 0, 0})}));
    auto empty = carve(fixtures::dyadic(), U({C(0)}), Rational(0), 4);
    ASSERT_TRUE(empty.ok());
    EXPECT_TRUE(empty.found->cells.empty());
    auto none = carve(bern13(), U({C(0, {1})}), R("1/3"), 8, 100'000'000);
    EXPECT_FALSE(none.ok());
    EXPECT_EQ(none.depth, 8u);
    EXPECT_THROW(carve(fixtures::dyadic(), U({C(0)}), R("3/2"), 4), DomainError);
    EXPECT_THROW(carve(fixtures::dyadic(), U({C(0)}), R("-1/2"), 4), DomainError);
}

TEST(Carve, NeedsSubsetSumFallback) {
    auto spec = MeasureSpec::bernoulli(Rs({"1/2", "1/3", "1/6"}));
    auto r = carve(spec, U({C(0)}), R("1/2"), 2);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(mass_of(spec, *r.found), ExtMass(R("1/2")));
    auto r2 = carve(spec, U({C(0, {1}), C(0, {2})}), R("1/2"), 0);
    ASSERT_TRUE(r2.ok());
    EXPECT_EQ(*r2.found, U({C(0, {1}), C(0, {2})}));
}

TEST(Carve, ResultsAreSound) {
    std::mt19937_64 rng(23);
    std::vector<MeasureSpec> specs{fixtures::dyadic(), MeasureSpec::padic_haar(3), MeasureSpec::cf({1}, {2, 3, 2}),
                                   MeasureSpec::bernoulli(Rs({"1/4", "1/4", "1/2"}))};
    for (const auto& spec : specs) {
        std::vector<CellId> ids;
        for (const auto& c : refine(spec, C(0))) ids.push_back(c.id);
        auto region = U(ids);
        auto total = mass_of(spec, region).value();
        for (int i = 0; i < 30; ++i) {
            std::uniform_int_distribution<long> num(0, 64);
            Rational target = total * Rational(num(rng), 64);
            auto r = carve(spec, region, target, 6);
            if (!r.ok()) continue;
            EXPECT_EQ(mass_of(spec, *r.found), ExtMass(target));
            EXPECT_TRUE(descends_from(*r.found, region));
        }
    }
}

TEST(Certificate, Examples) {
    ValuationCertificate cert{2, U({C(0, {1})}), 1, R("1/3")};
    EXPECT_TRUE(check_valuation_certificate(bern13(), cert));
    ValuationCertificate wrong_k{2, U({C(0, {1})}), 2, R("1/3")};
    EXPECT_FALSE(check_valuation_certificate(bern13(), wrong_k));
    ValuationCertificate wrong_q{3, U({C(0, {1})}), 1, R("1/3")};
    EXPECT_FALSE(check_valuation_certificate(bern13(), wrong_q));
    auto found = find_certificate(bern13(), U({C(0, {1})}), R("1/3"));
    ASSERT_TRUE(found.has_value());
    EXPECT_EQ(found->q, 2u);
    EXPECT_EQ(found->k, 1);
    EXPECT_FALSE(find_certificate(fixtures::dyadic(), U({C(0, {1})}), R("1/4")).has_value());
    auto infinite = MeasureSpec::bratteli(fixtures::bratteli_infinite());
    EXPECT_FALSE(check_valuation_certificate(infinite, ValuationCertificate{2, U({C(0)}), 0, R("1/3")}));
}

TEST(Certificate, ImpliesCarveFailure) {
    std::vector<std::pair<MeasureSpec, ValuationCertificate>> cases{
        {bern13(), {2, U({C(0, {1})}), 1, R("1/3")}},
        {MeasureSpec::bernoulli(Rs({"2/5", "3/5"})), {3, U({C(0, {1})}), 1, R("2/5")}},
        {MeasureSpec::bernoulli(Rs({"1/3", "2/3"})), {2, U({C(0, {1, 1})}), 2, R("2/9")}},
    };
    for (const auto& [spec, cert] : cases) {
        ASSERT_TRUE(check_valuation_certificate(spec, cert));
        for (std::size_t depth = 0; depth <= 10; ++depth)
            EXPECT_FALSE(carve(spec, cert.region, cert.target, depth, 100'000'000).ok()) << depth;
    }
}

TEST(Search, BernoulliThirdsIsNotGood) {
    auto v = find_nongood_witness(bern13(), 2);
    ASSERT_EQ(v.kind, VerdictKind::NotGood);
    ASSERT_TRUE(v.witness.has_value());
    EXPECT_EQ(v.witness->target, R("1/3"));
    EXPECT_EQ(v.witness->region, U({C(0, {1})}));
    ASSERT_TRUE(v.certificate.has_value());
    EXPECT_EQ(v.certificate->q, 2u);
    EXPECT_EQ(v.certificate->k, 1);
}

TEST(Search, GoodSpecsStayProbablyGood) {
    auto d = find_nongood_witness(fixtures::dyadic(), 4);
    EXPECT_EQ(d.kind, VerdictKind::ProbablyGood);
    EXPECT_EQ(d.depth, 4u);
    auto p = find_nongood_witness(MeasureSpec::padic_haar(3), 3);
    EXPECT_EQ(p.kind, VerdictKind::ProbablyGood);
    EXPECT_EQ(p.depth, 3u);
}

TEST(Search, AgreesWithExactGoodVerdicts) {
    std::vector<MeasureSpec> specs{fixtures::dyadic(), MeasureSpec::padic_haar(5), MeasureSpec::cf({1}, {2, 3, 2}),
                                   MeasureSpec::bernoulli(Rs({"1/3", "1/3", "1/3"})),
                                   MeasureSpec::bratteli(fixtures::bratteli_fn(5, BratteliMode::DistinguishedClass))};
    for (const auto& spec : specs) {
        ASSERT_EQ(decide_good(spec).kind, VerdictKind::Good) << canonical_dump(spec);
        for (std::size_t depth = 1; depth <= 3; ++depth) {
            SearchOptions opts;
            opts.horizon = 2;
            EXPECT_EQ(find_nongood_witness(spec, depth, opts).kind, VerdictKind::ProbablyGood) << canonical_dump(spec);
        }
    }
}

TEST(Bratteli, FNLaw) {
    for (long n = 3; n <= 17; ++n) {
        auto v = decide_bratteli_good(fixtures::bratteli_fn(n, BratteliMode::FullDiagram));
        bool expect_good = n == 3 || n == 5 || n == 9 || n == 17;
        EXPECT_EQ(v.kind, expect_good ? VerdictKind::Good : VerdictKind::NotGood) << n;
        if (expect_good) {
            ASSERT_TRUE(v.exponent.has_value()) << n;
            EXPECT_GE(*v.exponent, 1);
            continue;
        }
        ASSERT_TRUE(v.witness.has_value()) << n;
        ASSERT_TRUE(v.certificate.has_value()) << n;
        auto spec = MeasureSpec::bratteli(fixtures::bratteli_fn(n, BratteliMode::FullDiagram));
        EXPECT_TRUE(check_valuation_certificate(spec, *v.certificate)) << n;
        EXPECT_LE(v.certificate->q, 13u);
    }
}

TEST(Bratteli, DefectiveIsUnknown) {
    EXPECT_EQ(decide_bratteli_good(fixtures::bratteli_infinite()).kind, VerdictKind::Unknown);
}

TEST(Product, Examples) {
    DivisibleGroup dyadic(1, {2});
    EXPECT_EQ(decide_product_good(dyadic, Rs({"1", "2"})).kind, VerdictKind::Good);
    EXPECT_EQ(decide_product_good(dyadic, Rs({"1", "1/4", "8"})).kind, VerdictKind::Good);
    auto bad = decide_product_good(dyadic, Rs({"1", "2", "3"}));
    EXPECT_EQ(bad.kind, VerdictKind::NotGood);
    EXPECT_EQ(bad.offending_index, std::optional<std::size_t>(2));
    auto with_inner = decide_product_good(dyadic, Rs({"1", "3"}), fixtures::dyadic());
    ASSERT_EQ(with_inner.kind, VerdictKind::NotGood);
    ASSERT_TRUE(with_inner.witness.has_value());
    auto spec = MeasureSpec::product_counting(fixtures::dyadic(), Rs({"1", "3"}));
    EXPECT_FALSE(carve(spec, with_inner.witness->region, with_inner.witness->target, 4).ok());
    ASSERT_TRUE(with_inner.certificate.has_value());
    EXPECT_TRUE(check_valuation_certificate(spec, *with_inner.certificate));
}

TEST(Compactification, ExampleTriple) {
    auto one = decide_compactification_good(fixtures::dyadic_forest(), CompactificationSpec::one_point());
    EXPECT_EQ(one.kind, VerdictKind::Good);
    auto odd_even = decide_compactification_good(
        fixtures::dyadic_forest(), CompactificationSpec{{PieceClass::residue(2, {0}), PieceClass::residue(2, {1})}});
    ASSERT_EQ(odd_even.kind, VerdictKind::NotGood);
    EXPECT_EQ(odd_even.new_values, Rs({"2/3", "1/3"}));
    ASSERT_TRUE(odd_even.witness.has_value());
    EXPECT_EQ(odd_even.witness->target, R("2/3"));
    auto balanced = decide_compactification_good(
        fixtures::dyadic_forest_balanced(),
        CompactificationSpec{{PieceClass::residue(2, {0}), PieceClass::residue(2, {1})}});
    EXPECT_EQ(balanced.kind, VerdictKind::Good);
    EXPECT_EQ(balanced.new_values, Rs({"1/2", "1/2"}));
}

TEST(Compactification, AlexandroffAgreesWithUnitMembership) {
    std::vector<MeasureSpec> specs{fixtures::dyadic_forest(), fixtures::dyadic_forest_quarters(),
                                   MeasureSpec::scaled(R("1/3"), fixtures::dyadic_forest())};
    for (const auto& spec : specs) {
        auto g = value_group(spec);
        ASSERT_TRUE(g.has_value());
        auto v = decide_compactification_good(spec, CompactificationSpec::one_point());
        bool one_in = group_member(total_mass(spec).value(), *g);
        EXPECT_EQ(v.kind, one_in ? VerdictKind::Good : VerdictKind::NotGood) << canonical_dump(spec);
    }
}

TEST(DecideGood, Structural) {
    EXPECT_EQ(decide_good(MeasureSpec::padic_haar(5)).kind, VerdictKind::Good);
    EXPECT_EQ(decide_good(MeasureSpec::cf({1}, {2, 3, 2})).kind, VerdictKind::Good);
    EXPECT_EQ(decide_good(bern13()).kind, VerdictKind::Unknown);
    EXPECT_EQ(decide_good(fixtures::dyadic_forest()).kind, VerdictKind::Good);
    EXPECT_EQ(decide_good(MeasureSpec::bratteli(fixtures::bratteli_fn(4, BratteliMode::FullDiagram))).kind,
              VerdictKind::NotGood);
    EXPECT_EQ(decide_good(MeasureSpec::product_counting(fixtures::dyadic(), Rs({"1", "3"}))).kind,
              VerdictKind::NotGood);
    EXPECT_EQ(to_string(VerdictKind::ProbablyGood), "ProbablyGood");
}
