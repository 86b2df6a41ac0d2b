#include "goodmeasure/exactnum.hpp"

#include <algorithm>
#include <sstream>

namespace goodmeasure {

namespace {

mpq_class make_q(BigInt n, BigInt d) {
    if (d == 0) throw DomainError("rational with zero denominator");
    mpq_class q(n, d);
    q.canonicalize();
    return q;
}

bool all_digits(const std::string& s, bool allow_sign) {
    if (s.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (s[0] == '-' || s[0] == '+')) i = 1;
    if (i == s.size()) return false;
    return std::all_of(s.begin() + static_cast<long>(i), s.end(),
                       [](char c) { return c >= '0' && c <= '9'; });
}

// Trial division bound; cofactors above it must be prime for factoring to succeed.
constexpr unsigned long kTrialBound = 1'000'000;

}  // namespace

Rational::Rational(long n, long d) : v_(make_q(BigInt(n), BigInt(d))) {}
Rational::Rational(BigInt n, BigInt d) : v_(make_q(std::move(n), std::move(d))) {}
Rational::Rational(mpq_class v) : v_(std::move(v)) { v_.canonicalize(); }

Rational Rational::from_strings(const std::string& num, const std::string& den) {
    if (!all_digits(num, true) || !all_digits(den, true))
        throw DomainError("malformed rational '" + num + "/" + den + "'");
    return Rational(BigInt(num, 10), BigInt(den, 10));
}

Rational Rational::parse(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos) return from_strings(text, "1");
    return from_strings(text.substr(0, slash), text.substr(slash + 1));
}

std::string Rational::str() const {
    if (is_integer()) return v_.get_num().get_str();
    return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

Rational& Rational::operator+=(const Rational& o) { v_ += o.v_; return *this; }
Rational& Rational::operator-=(const Rational& o) { v_ -= o.v_; return *this; }
Rational& Rational::operator*=(const Rational& o) { v_ *= o.v_; return *this; }
Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero()) throw DomainError("division by zero");
    v_ /= o.v_;
    return *this;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

Rational pow(const Rational& base, long exponent) {
    if (exponent < 0) {
        if (base.is_zero()) throw DomainError("negative power of zero");
        return pow(Rational(1) / base, -exponent);
    }
    BigInt n, d;
    mpz_pow_ui(n.get_mpz_t(), base.num().get_mpz_t(), static_cast<unsigned long>(exponent));
    mpz_pow_ui(d.get_mpz_t(), base.den().get_mpz_t(), static_cast<unsigned long>(exponent));
    return Rational(n, d);
}

// ---------------------------------------------------------------------------

ExtMass::ExtMass(Rational r) : value_(std::move(r)) {
    if (value_->sign() < 0) throw DomainError("negative mass " + value_->str());
}

ExtMass ExtMass::infinite() {
    ExtMass m;
    m.value_.reset();
    return m;
}

const Rational& ExtMass::value() const {
    if (!value_) throw DomainError("infinite mass has no finite value");
    return *value_;
}

std::string ExtMass::str() const { return value_ ? value_->str() : "inf"; }

ExtMass operator+(const ExtMass& a, const ExtMass& b) {
    if (a.is_infinite() || b.is_infinite()) return ExtMass::infinite();
    return ExtMass(*a.value_ + *b.value_);
}

ExtMass operator*(const ExtMass& a, const Rational& c) {
    if (c.sign() <= 0) throw DomainError("mass scaled by non-positive factor");
    if (a.is_infinite()) return a;
    return ExtMass(*a.value_ * c);
}

std::strong_ordering operator<=>(const ExtMass& a, const ExtMass& b) {
    if (a.is_infinite() && b.is_infinite()) return std::strong_ordering::equal;
    if (a.is_infinite()) return std::strong_ordering::greater;
    if (b.is_infinite()) return std::strong_ordering::less;
    return *a.value_ <=> *b.value_;
}

std::ostream& operator<<(std::ostream& os, const ExtMass& m) { return os << m.str(); }

// ---------------------------------------------------------------------------

bool is_prime(Prime q) {
    if (q < 2) return false;
    if (q < 4) return true;
    if (q % 2 == 0) return false;
    for (Prime f = 3; f * f <= q; f += 2)
        if (q % f == 0) return false;
    return true;
}

std::vector<Prime> prime_factors(const BigInt& n) {
    if (n == 0) throw DomainError("prime factors of zero");
    BigInt m = abs(n);
    std::vector<Prime> out;
    for (unsigned long f = 2; f <= kTrialBound; f += (f == 2 ? 1 : 2)) {
        if (m == 1) break;
        BigInt fz(f);
        if (fz * fz > m) break;
        if (mpz_divisible_ui_p(m.get_mpz_t(), f)) {
            out.push_back(f);
            while (mpz_divisible_ui_p(m.get_mpz_t(), f)) m /= f;
        }
    }
    if (m > 1) {
        if (mpz_probab_prime_p(m.get_mpz_t(), 40) == 0 || !m.fits_ulong_p())
            throw DomainError("cannot factor " + m.get_str() + " within the trial-division bound");
        out.push_back(m.get_ui());
    }
    std::sort(out.begin(), out.end());
    return out;
}

long vq(Prime q, const BigInt& n) {
    if (!is_prime(q)) throw DomainError("valuation at non-prime " + std::to_string(q));
    if (n == 0) throw DomainError("valuation of zero");
    BigInt m = abs(n);
    BigInt qq(static_cast<unsigned long>(q));
    return static_cast<long>(mpz_remove(m.get_mpz_t(), m.get_mpz_t(), qq.get_mpz_t()));
}

long vq(Prime q, const Rational& r) {
    if (r.is_zero()) throw DomainError("valuation of zero");
    return vq(q, r.num()) - vq(q, r.den());
}

BigInt gcd(const BigInt& a, const BigInt& b) {
    BigInt g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

BigInt lcm(const BigInt& a, const BigInt& b) {
    BigInt l;
    mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return l;
}

Rational rational_gcd(std::span<const Rational> values) {
    if (values.empty()) throw DomainError("gcd of an empty list");
    BigInt g = 0, l = 1;
    for (const auto& v : values) {
        if (v.sign() <= 0) throw DomainError("gcd of non-positive rational " + v.str());
        g = gcd(g, v.num());
        l = lcm(l, v.den());
    }
    return Rational(g, l);
}

// ---------------------------------------------------------------------------

DivisibleGroup::DivisibleGroup(Rational scale, std::vector<Prime> primes)
    : scale_(std::move(scale)), primes_(std::move(primes)) {
    if (scale_.sign() <= 0) throw DomainError("group scale must be positive");
    std::sort(primes_.begin(), primes_.end());
    primes_.erase(std::unique(primes_.begin(), primes_.end()), primes_.end());
    BigInt n = scale_.num(), d = scale_.den();
    for (Prime p : primes_) {
        if (!is_prime(p)) throw DomainError("group prime set contains non-prime " + std::to_string(p));
        BigInt pz(static_cast<unsigned long>(p));
        mpz_remove(n.get_mpz_t(), n.get_mpz_t(), pz.get_mpz_t());
        mpz_remove(d.get_mpz_t(), d.get_mpz_t(), pz.get_mpz_t());
    }
    scale_ = Rational(n, d);
}

namespace {

bool only_primes_in(BigInt n, const std::vector<Prime>& primes) {
    n = abs(n);
    for (Prime p : primes) {
        BigInt pz(static_cast<unsigned long>(p));
        mpz_remove(n.get_mpz_t(), n.get_mpz_t(), pz.get_mpz_t());
    }
    return n == 1;
}

}  // namespace

bool DivisibleGroup::contains(const Rational& g) const {
    if (g.is_zero()) return true;
    return only_primes_in((g / scale_).den(), primes_);
}

DivisibleGroup DivisibleGroup::scaled(const Rational& c) const {
    if (c.sign() <= 0) throw DomainError("group scaled by non-positive factor");
    return DivisibleGroup(scale_ * c, primes_);
}

std::string DivisibleGroup::str() const {
    std::ostringstream os;
    os << "(" << scale_ << ")Z[1/{";
    for (std::size_t i = 0; i < primes_.size(); ++i) os << (i ? "," : "") << primes_[i];
    os << "}]";
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const DivisibleGroup& g) { return os << g.str(); }

bool GroupLikeSet::contains(const Rational& g) const {
    if (g.sign() < 0) return false;
    auto c = ExtMass(g) <=> bound;
    if (c > 0 || (c == 0 && !includes_bound)) return false;
    return group.contains(g);
}

std::ostream& operator<<(std::ostream& os, const GroupLikeSet& d) {
    return os << d.group << " & [0, " << d.bound << (d.includes_bound ? "]" : ")");
}

DivisibleGroup canonical_group(std::span<const Rational> generators, const BigInt& lambda) {
    if (generators.empty()) throw DomainError("canonical_group needs at least one generator");
    if (lambda <= 0) throw DomainError("lambda must be a positive integer");
    std::vector<Prime> primes;
    if (lambda > 1) primes = prime_factors(lambda);
    return DivisibleGroup(rational_gcd(generators), std::move(primes));
}

bool group_member(const Rational& g, const DivisibleGroup& group) { return group.contains(g); }

bool divisor_member(const Rational& d, const DivisibleGroup& group) {
    if (d.sign() <= 0) throw DomainError("divisor candidate must be positive");
    return only_primes_in(d.num(), group.primes()) && only_primes_in(d.den(), group.primes());
}

bool grouplike_contains(const GroupLikeSet& d, const Rational& g) { return d.contains(g); }

std::optional<Rational> group_scale_relation(const DivisibleGroup& g1, const DivisibleGroup& g2) {
    if (g1.primes() != g2.primes()) return std::nullopt;
    return g1.scale() / g2.scale();
}

std::optional<DivisibleGroup> group_sum(std::span<const DivisibleGroup> groups) {
    if (groups.empty()) return std::nullopt;
    std::vector<Rational> scales;
    for (const auto& g : groups) {
        if (g.primes() != groups.front().primes()) return std::nullopt;
        scales.push_back(g.scale());
    }
    return DivisibleGroup(rational_gcd(scales), groups.front().primes());
}

}  // namespace goodmeasure
