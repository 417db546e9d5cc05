#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <string>
#include <string_view>

#include "kstar/errors.hpp"

namespace kstar {

// Arbitrary-precision rational, kept in lowest terms with positive
// denominator by the backend.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

inline bool is_zero(const Rational& q) { return q.is_zero(); }

// Canonical "p/q" form; the denominator is printed even when it is 1 so that
// serialized values round-trip through one unambiguous grammar.
inline std::string to_pq_string(const Rational& q) {
    return numerator(q).str() + "/" + denominator(q).str();
}

// Accepts "p/q" or a bare integer "p".  The GMP constructor stores the pair
// verbatim, so reduce to lowest terms here; everything downstream assumes
// canonical form.
inline Rational parse_rational(std::string_view s) {
    try {
        Rational q{std::string(s)};
        if (denominator(q).is_zero())
            throw ParseError("zero denominator in rational '" + std::string(s) + "'");
        mpq_canonicalize(q.backend().data());
        return q;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("cannot parse rational '" + std::string(s) + "'");
    }
}

inline Rational factorial(long n) {
    if (n < 0) throw DomainError("factorial of negative integer");
    Integer f = 1;
    for (long i = 2; i <= n; ++i) f *= i;
    return Rational(f);
}

inline Rational binomial(long n, long k) {
    if (k < 0) return Rational(0);
    Rational r = 1;
    for (long i = 0; i < k; ++i) {
        r *= n - i;
        r /= i + 1;
    }
    return r;
}

// Gamma(s+n)/Gamma(s) = s(s+1)...(s+n-1), exact over the rationals via the
// functional equation.  n >= 0.
inline Rational gamma_ratio_rising(const Rational& s, long n) {
    Rational r = 1;
    for (long i = 0; i < n; ++i) r *= s + i;
    return r;
}

// Gamma(s+1)/Gamma(s-n+1) = s(s-1)...(s-n+1).
inline Rational gamma_ratio_falling(const Rational& s, long n) {
    Rational r = 1;
    for (long i = 0; i < n; ++i) r *= s - i;
    return r;
}

}  // namespace kstar
