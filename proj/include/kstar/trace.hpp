#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kstar/fock.hpp"

namespace kstar {

// Rational multiple of an integer power of pi.  Trace constants on the
// curved models are pi^N times a rational, so keeping the power symbolic
// defers every float conversion to the final comparison.
struct PiRational {
    Rational q = 0;
    int pi_pow = 0;

    PiRational() = default;
    PiRational(Rational q_, int pi_pow_ = 0) : q(std::move(q_)), pi_pow(pi_pow_) {
        if (q == 0) pi_pow = 0;
    }

    bool is_zero() const { return q == 0; }
    double value() const;
    std::string str() const;

    PiRational operator*(const Rational& s) const { return {q * s, pi_pow}; }
    PiRational operator*(const PiRational& o) const { return {q * o.q, pi_pow + o.pi_pow}; }
    // addition is defined only between like powers (or with zero)
    PiRational operator+(const PiRational& o) const;
    PiRational operator-(const PiRational& o) const { return *this + PiRational(-o.q, o.pi_pow); }
    bool operator==(const PiRational& o) const { return q == o.q && pi_pow == o.pi_pow; }
};

// Chart-local trace functional.  Cyclicity forces the trace of every basis
// element E_{m,n} with m != n to vanish, so the functional is fixed by its
// value c_p on the vacuum projector.
struct TraceSpec {
    PiRational c_p{Rational(1), 0};
    Model model = Model::Custom;

    static TraceSpec unit(Model m = Model::Custom) { return {{Rational(1), 0}, m}; }
    // integral normalization on the disc model: c_p = chn_c0(hbar, dim)
    static TraceSpec chn_integral(const Rational& hbar, int dim);
};

// pi^N Gamma(1/hbar - N) / Gamma(1/hbar) = pi^N / ((1/hbar - N) ... (1/hbar - 1)),
// exact over the rationals by the Gamma functional equation.  This is the
// integral of mu_g exp(-Phi/hbar) over the unit ball; it requires
// 1/hbar > N, otherwise that integral diverges.
PiRational chn_c0(const Rational& hbar, int dim);

// c_p * sum over the stored diagonal of A_{n,n} n!.  The weight n! converts
// a coefficient on E_{n,n} into one on the normalized projector |n><n|.
// Linear, and exactly cyclic against the n!-weighted matrix product.
PiRational sp_trace(const FockMatrix& A, const TraceSpec& spec);

// sp_trace(A B) - sp_trace(B A); identically zero in exact arithmetic for
// every pair storable under the certificates.
PiRational cyclicity_check(const FockContext& ctx, const FockMatrix& A, const FockMatrix& B,
                           const TraceSpec& spec);

// Classical Gaussian rules backing the quadrature traces.  Construction
// runs a moment self-check (k! for the half line, 1/(k+1) for the unit
// interval) and throws InternalError if the rule misses its degree.
struct QuadratureRule {
    enum class Domain { HalfLineExpWeight, UnitInterval };
    Domain domain;
    std::vector<double> x, w;

    int exact_degree() const { return 2 * static_cast<int>(x.size()) - 1; }
    double integrate(const std::function<double(double)>& f) const;

    static QuadratureRule gauss_laguerre(int npts);    // weight e^{-t} on (0, inf)
    static QuadratureRule gauss_legendre01(int npts);  // weight 1 on (0, 1)
};

// (1/(pi hbar))^N times the integral over C^N of the normalized basis
// function of |m><n| against Lebesgue measure.  Angular integrals are
// treated exactly (they vanish unless m = n and contribute pi per factor on
// the diagonal); the radial factor reduces under u = hbar t to
// int t^k e^{-t} dt and is evaluated by gauss_laguerre.  Result is
// delta_{m,n} up to rounding.  npts is clamped up so every requested moment
// lies inside the exactness degree.
double quad_trace_Cn(const MultiIndex& m, const MultiIndex& n, const Rational& hbar,
                     int npts = 24);

// Integral over the unit ball of mu_g = (1-|z|^2)^{-(N+1)} times the
// normalized basis function of |m><n| on the disc model.  Angular parts are
// exact as above; the radial simplex integral is split by the Duffy
// substitution into one dimensional Beta integrals, each evaluated by
// gauss_legendre01 when its exponent is a nonnegative integer and by a
// tanh-sinh rule otherwise.  Requires 1/hbar > N; the value is
// chn_c0(hbar, N) * delta_{m,n} up to quadrature error.
double quad_trace_CHn(const MultiIndex& m, const MultiIndex& n, const Rational& hbar,
                      int npts = 48);

}  // namespace kstar
