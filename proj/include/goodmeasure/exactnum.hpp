#pragma once

/**
 * @file exactnum.hpp
 * @brief Exact rationals, extended masses and finitely presented subgroups of Q.
 *
 * Every subgroup handled here has the form c * Z[1/P]: a positive scale c and
 * a finite set of primes P.  These are exactly the subgroups of Q closed under
 * division by some fixed positive integer, which covers every value group that
 * arises from the measure descriptions in space.hpp.
 *
 * Construction canonicalizes: primes of P are divided out of the scale, so two
 * groups are equal iff their (scale, primes) fields are equal.
 */

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace goodmeasure {

using BigInt = mpz_class;
using Prime = std::uint64_t;

/// Precondition violated by the caller (zero valuation input, non-positive scale, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Arbitrary precision rational, always in lowest terms with positive denominator.
class Rational {
public:
    Rational() = default;
    Rational(long n) : v_(n) {}  // NOLINT(google-explicit-constructor)
    Rational(long n, long d);
    Rational(BigInt n, BigInt d);
    explicit Rational(mpq_class v);

    /// Parses decimal numerator/denominator strings; throws DomainError on junk or zero denominator.
    static Rational from_strings(const std::string& num, const std::string& den);
    /// Parses "a", "a/b" (decimal).
    static Rational parse(const std::string& text);

    BigInt num() const { return v_.get_num(); }
    BigInt den() const { return v_.get_den(); }
    const mpq_class& raw() const { return v_; }

    int sign() const { return sgn(v_); }
    bool is_zero() const { return sign() == 0; }
    bool is_integer() const { return v_.get_den() == 1; }

    std::string str() const;  // "n" or "n/d"

    Rational operator-() const { return Rational(mpq_class(-v_)); }
    Rational& operator+=(const Rational& o);
    Rational& operator-=(const Rational& o);
    Rational& operator*=(const Rational& o);
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        int c = cmp(a.v_, b.v_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    mpq_class v_{0};
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

/// Integer power, exponent may be negative (base must then be nonzero).
Rational pow(const Rational& base, long exponent);

/// Non-negative mass: a finite rational or infinity.
class ExtMass {
public:
    ExtMass() = default;
    ExtMass(Rational r);  // NOLINT(google-explicit-constructor)
    ExtMass(long n) : ExtMass(Rational(n)) {}  // NOLINT(google-explicit-constructor)

    static ExtMass infinite();

    bool is_finite() const { return value_.has_value(); }
    bool is_infinite() const { return !value_.has_value(); }
    /// Throws DomainError when infinite.
    const Rational& value() const;

    std::string str() const;  // "inf" for the infinite marker

    friend ExtMass operator+(const ExtMass& a, const ExtMass& b);
    /// Scales by a positive factor.
    friend ExtMass operator*(const ExtMass& a, const Rational& c);

    friend bool operator==(const ExtMass& a, const ExtMass& b) { return a.value_ == b.value_; }
    friend std::strong_ordering operator<=>(const ExtMass& a, const ExtMass& b);

private:
    std::optional<Rational> value_ = Rational(0);
};

std::ostream& operator<<(std::ostream& os, const ExtMass& m);

// ---------------------------------------------------------------------------
// Number theory helpers

bool is_prime(Prime q);
/// Distinct prime factors of |n|, ascending.  n must be nonzero.
std::vector<Prime> prime_factors(const BigInt& n);
/// q-adic valuation of a nonzero integer.
long vq(Prime q, const BigInt& n);
/// q-adic valuation v_q(num) - v_q(den); throws DomainError for zero or non-prime q.
long vq(Prime q, const Rational& r);
BigInt gcd(const BigInt& a, const BigInt& b);
BigInt lcm(const BigInt& a, const BigInt& b);
/// gcd of positive rationals: gcd of numerators over lcm of denominators.
Rational rational_gcd(std::span<const Rational> values);

// ---------------------------------------------------------------------------
// Groups

/// The subgroup scale * Z[1/primes] of Q.
class DivisibleGroup {
public:
    DivisibleGroup(Rational scale, std::vector<Prime> primes);

    const Rational& scale() const { return scale_; }
    const std::vector<Prime>& primes() const { return primes_; }
    /// Dense in R iff at least one prime is invertible.
    bool is_dense() const { return !primes_.empty(); }

    bool contains(const Rational& g) const;
    /// c * G for c > 0.
    DivisibleGroup scaled(const Rational& c) const;

    std::string str() const;

    friend bool operator==(const DivisibleGroup&, const DivisibleGroup&) = default;

private:
    Rational scale_;
    std::vector<Prime> primes_;
};

std::ostream& operator<<(std::ostream& os, const DivisibleGroup& g);

/// D = G intersected with [0, bound), or [0, bound] when includes_bound is set.
struct GroupLikeSet {
    DivisibleGroup group;
    ExtMass bound;
    bool includes_bound = false;

    bool contains(const Rational& g) const;
    friend bool operator==(const GroupLikeSet&, const GroupLikeSet&) = default;
};

std::ostream& operator<<(std::ostream& os, const GroupLikeSet& d);

/// Smallest subgroup containing the generators and closed under division by lambda.
DivisibleGroup canonical_group(std::span<const Rational> generators, const BigInt& lambda);

bool group_member(const Rational& g, const DivisibleGroup& group);
/// d * G == G; throws DomainError for d <= 0.
bool divisor_member(const Rational& d, const DivisibleGroup& group);
bool grouplike_contains(const GroupLikeSet& d, const Rational& g);
/// Some c with g1 == c * g2, or nullopt when prime sets differ.
std::optional<Rational> group_scale_relation(const DivisibleGroup& g1, const DivisibleGroup& g2);
/// Sum of groups sharing a prime set; nullopt when the prime sets differ or the list is empty.
std::optional<DivisibleGroup> group_sum(std::span<const DivisibleGroup> groups);

}  // namespace goodmeasure
