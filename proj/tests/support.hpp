#pragma once

#include <random>
#include <string>
#include <vector>

#include "goodmeasure/exactnum.hpp"
#include "goodmeasure/space.hpp"

namespace gmtest {

inline goodmeasure::Rational R(const std::string& s) { return goodmeasure::Rational::parse(s); }

inline std::vector<goodmeasure::Rational> Rs(std::initializer_list<const char*> xs) {
    std::vector<goodmeasure::Rational> out;
    for (const char* x : xs) out.push_back(R(x));
    return out;
}

inline goodmeasure::CellId C(std::size_t piece, std::vector<std::uint32_t> path = {}) { return {piece, std::move(path)}; }

inline goodmeasure::CompactOpen U(std::vector<goodmeasure::CellId> cells) { return goodmeasure::CompactOpen(std::move(cells)); }

/// Random nonzero rational with numerator and denominator below `limit`.
inline goodmeasure::Rational random_rational(std::mt19937_64& rng, long limit = 1000, bool positive = false) {
    std::uniform_int_distribution<long> num(1, limit - 1), den(1, limit - 1), sign(0, 1);
    long n = num(rng);
    if (!positive && sign(rng)) n = -n;
    return goodmeasure::Rational(n, den(rng));
}

}  // namespace gmtest
