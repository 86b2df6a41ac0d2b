#include <gtest/gtest.h>

#include "support.hpp"

using namespace goodmeasure;
using gmtest::R;
using gmtest::Rs;

TEST(Rational, CanonicalForm) {
    EXPECT_EQ(R("6/-4").str(), "-3/2");
    EXPECT_EQ(R("4/2").str(), "2");
    EXPECT_EQ(Rational(0, 5), Rational(0));
    EXPECT_THROW(R("1/0"), DomainError);
    EXPECT_THROW(R("1/x"), DomainError);
    EXPECT_LT(R("1/3"), R("1/2"));
}

TEST(Rational, Powers) {
    EXPECT_EQ(pow(R("2/3"), 3), R("8/27"));
    EXPECT_EQ(pow(R("2/3"), -2), R("9/4"));
    EXPECT_THROW(pow(Rational(0), -1), DomainError);
}

TEST(ExtMass, InfinityAbsorbs) {
    ExtMass inf = ExtMass::infinite();
    EXPECT_TRUE((inf + ExtMass(R("1/2"))).is_infinite());
    EXPECT_EQ(ExtMass(R("1/2")) + ExtMass(R("1/4")), ExtMass(R("3/4")));
    EXPECT_GT(inf, ExtMass(R("1000000")));
    EXPECT_THROW(inf.value(), DomainError);
    EXPECT_THROW(ExtMass(R("-1")), DomainError);
    EXPECT_EQ(inf.str(), "inf");
}

TEST(Valuation, Examples) {
    EXPECT_EQ(vq(2, R("4/3")), 2);
    EXPECT_EQ(vq(3, R("1/9")), -2);
    EXPECT_EQ(vq(2, R("5/7")), 0);
    EXPECT_THROW(vq(2, Rational(0)), DomainError);
    EXPECT_THROW(vq(4, R("1/2")), DomainError);
}

TEST(Valuation, UltrametricProperty) {
    std::mt19937_64 rng(20240611);
    const Prime qs[] = {2, 3, 5, 7};
    for (int i = 0; i < 10000; ++i) {
        Rational r = gmtest::random_rational(rng), s = gmtest::random_rational(rng);
        Prime q = qs[i % 4];
        EXPECT_EQ(vq(q, r * s), vq(q, r) + vq(q, s));
        if (!(r + s).is_zero()) EXPECT_GE(vq(q, r + s), std::min(vq(q, r), vq(q, s)));
    }
}

TEST(PrimeFactors, SmallAndLarge) {
    EXPECT_EQ(prime_factors(BigInt(360)), (std::vector<Prime>{2, 3, 5}));
    EXPECT_EQ(prime_factors(BigInt(1)), std::vector<Prime>{});
    EXPECT_EQ(prime_factors(BigInt("1000000007")), std::vector<Prime>{1000000007});
    EXPECT_THROW(prime_factors(BigInt(0)), DomainError);
}

TEST(CanonicalGroup, Examples) {
    auto g1 = canonical_group(Rs({"1/2", "1/3"}), 1);
    EXPECT_EQ(g1.scale(), R("1/6"));
    EXPECT_TRUE(g1.primes().empty());
    auto g2 = canonical_group(Rs({"1/3"}), 4);
    EXPECT_EQ(g2.scale(), R("1/3"));
    EXPECT_EQ(g2.primes(), std::vector<Prime>{2});
    auto g3 = canonical_group(Rs({"1"}), 1);
    EXPECT_EQ(g3.scale(), Rational(1));
    EXPECT_FALSE(g3.is_dense());
    EXPECT_THROW(canonical_group(std::vector<Rational>{}, 2), DomainError);
}

TEST(CanonicalGroup, Idempotent) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        std::vector<Rational> gens{gmtest::random_rational(rng, 100, true), gmtest::random_rational(rng, 100, true)};
        auto g = canonical_group(gens, BigInt(static_cast<long>(i % 12 + 1)));
        DivisibleGroup again(g.scale(), g.primes());
        EXPECT_EQ(again, g);
        EXPECT_EQ(again.scale(), g.scale());
    }
}

TEST(GroupMember, Examples) {
    DivisibleGroup dyadic(1, {2});
    EXPECT_TRUE(group_member(R("3/8"), dyadic));
    EXPECT_FALSE(group_member(R("2/3"), dyadic));
    EXPECT_TRUE(group_member(R("2/3"), DivisibleGroup(R("1/3"), {2})));
    EXPECT_TRUE(group_member(Rational(0), dyadic));
    EXPECT_TRUE(group_member(R("-5/4"), dyadic));
}

TEST(GroupMember, Closure) {
    std::mt19937_64 rng(11);
    DivisibleGroup g(R("3/7"), {2, 5});
    std::uniform_int_distribution<long> a(-500, 500), e(0, 6);
    auto member = [&] {
        return g.scale() * Rational(a(rng)) / pow(Rational(2), e(rng)) / pow(Rational(5), e(rng));
    };
    for (int i = 0; i < 1000; ++i) {
        Rational x = member(), y = member();
        ASSERT_TRUE(g.contains(x));
        EXPECT_TRUE(g.contains(x + y));
        EXPECT_TRUE(g.contains(x - y));
    }
}

TEST(DivisorMember, Examples) {
    DivisibleGroup dyadic(1, {2});
    EXPECT_TRUE(divisor_member(Rational(2), dyadic));
    EXPECT_FALSE(divisor_member(Rational(3), dyadic));
    EXPECT_TRUE(divisor_member(R("1/4"), DivisibleGroup(5, {2})));
    EXPECT_THROW(divisor_member(Rational(0), dyadic), DomainError);
    EXPECT_THROW(divisor_member(R("-2"), dyadic), DomainError);
}

TEST(DivisorMember, ClosedUnderProductAndInverse) {
    std::mt19937_64 rng(13);
    DivisibleGroup g(R("1/3"), {2, 7});
    std::uniform_int_distribution<long> e(-5, 5);
    for (int i = 0; i < 1000; ++i) {
        Rational d1 = pow(Rational(2), e(rng)) * pow(Rational(7), e(rng));
        Rational d2 = pow(Rational(2), e(rng)) * pow(Rational(7), e(rng));
        ASSERT_TRUE(divisor_member(d1, g));
        EXPECT_TRUE(divisor_member(d1 * d2, g));
        EXPECT_TRUE(divisor_member(Rational(1) / d1, g));
        EXPECT_EQ(g.scaled(d1), g);
    }
}

TEST(GroupLike, Examples) {
    GroupLikeSet unit{DivisibleGroup(1, {2}), ExtMass(1), false};
    EXPECT_TRUE(grouplike_contains(unit, R("3/4")));
    EXPECT_FALSE(grouplike_contains(unit, Rational(1)));
    EXPECT_FALSE(grouplike_contains(unit, R("-1/4")));
    GroupLikeSet triadic{DivisibleGroup(1, {3}), ExtMass(1), true};
    EXPECT_TRUE(grouplike_contains(triadic, R("2/9")));
    EXPECT_TRUE(grouplike_contains(triadic, Rational(1)));
    GroupLikeSet open{DivisibleGroup(1, {5}), ExtMass::infinite(), false};
    EXPECT_TRUE(grouplike_contains(open, R("1000/25")));
}

TEST(GroupLike, DifferenceClosure) {
    std::mt19937_64 rng(17);
    GroupLikeSet d{DivisibleGroup(R("1/3"), {2}), ExtMass(R("5/2")), false};
    std::uniform_int_distribution<long> a(0, 1 << 10);
    for (int i = 0; i < 1000; ++i) {
        Rational x = R("1/3") * Rational(a(rng), 1 << 8), y = R("1/3") * Rational(a(rng), 1 << 8);
        if (!d.contains(x) || !d.contains(y)) continue;
        if (y < x) std::swap(x, y);
        EXPECT_TRUE(d.contains(y - x));
    }
}

TEST(GroupScaleRelation, Examples) {
    EXPECT_EQ(group_scale_relation(DivisibleGroup(1, {2}), DivisibleGroup(R("1/4"), {2})), Rational(1));
    EXPECT_EQ(group_scale_relation(DivisibleGroup(R("1/3"), {2}), DivisibleGroup(1, {2})), R("1/3"));
    EXPECT_FALSE(group_scale_relation(DivisibleGroup(1, {2}), DivisibleGroup(1, {3})).has_value());
}

TEST(GroupSum, SharedPrimes) {
    std::vector<DivisibleGroup> gs{DivisibleGroup(R("1/2"), {3}), DivisibleGroup(R("1/5"), {3})};
    auto s = group_sum(gs);
    ASSERT_TRUE(s);
    EXPECT_EQ(s->scale(), R("1/10"));
    gs.emplace_back(1, std::vector<Prime>{2});
    EXPECT_FALSE(group_sum(gs).has_value());
}
