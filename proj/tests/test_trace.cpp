#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "kstar/trace.hpp"
#include "test_support.hpp"

using namespace kstar;
using testing::Rng;

namespace {

FockMatrix basis(const MultiIndex& m, const MultiIndex& n) {
    FockMatrix a(m.dim(), kInfDeg, kInfDeg);
    a.add(m, n, Rational(1));
    return a;
}

FockMatrix rand_matrix(Rng& rng, int dim, int maxrow, int maxcol, int nterms) {
    FockMatrix a(dim, kInfDeg, kInfDeg);
    for (int t = 0; t < nterms; ++t)
        a.add(rng.index(dim, maxrow), rng.index(dim, maxcol), rng.rational());
    return a;
}

MultiIndex mi(int v) { return MultiIndex{v}; }

// number operator for slot i: sum_n n_i |n><n|, coefficients n_i / n! on the
// unnormalized basis
FockMatrix number_op(const FockContext& ctx, int i, int d) {
    FockMatrix a(ctx.dim(), d, d);
    for_each_multi_index(ctx.dim(), d, [&](const MultiIndex& n) {
        if (n[i] > 0) a.add(n, n, Rational(n[i]) / n.fact());
    });
    return a;
}

std::vector<MultiIndex> block_indices(int dim, int d) {
    std::vector<MultiIndex> v;
    for_each_multi_index(dim, d, [&](const MultiIndex& n) { v.push_back(n); });
    return v;
}

}  // namespace

TEST_CASE("vacuum and basis traces follow from cyclicity") {
    auto spec = TraceSpec::unit(Model::Cn);
    auto ctx = FockContext::build(Model::Cn, 1, Rational(1), 4);

    CHECK(sp_trace(vacuum_matrix(ctx), spec) == PiRational(Rational(1)));
    for (int mdeg = 0; mdeg <= 3; ++mdeg)
        for (int ndeg = 0; ndeg <= 3; ++ndeg) {
            PiRational t = sp_trace(basis(mi(mdeg), mi(ndeg)), spec);
            if (mdeg == ndeg)
                CHECK(t == PiRational(factorial(ndeg)));
            else
                CHECK(t.is_zero());
        }

    // linear in the matrix argument
    Rng rng(131071);
    FockMatrix A = rand_matrix(rng, 1, 4, 4, 6);
    FockMatrix B = rand_matrix(rng, 1, 4, 4, 6);
    Rational lam = Rational(3) / 7;
    PiRational lhs = sp_trace(A + B.scaled(lam), spec);
    PiRational rhs = sp_trace(A, spec) + sp_trace(B, spec) * lam;
    CHECK(lhs == rhs);

    // a pi-weighted normalization scales every value symbolically
    TraceSpec quarter{{Rational(1) / 4, 1}, Model::CHn};
    PiRational v = sp_trace(vacuum_matrix(ctx), quarter);
    CHECK(v == PiRational(Rational(1) / 4, 1));
    CHECK(v.str() == "1/4 * pi^1");
    CHECK(v.value() == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));

    // sums of unlike pi powers have no rational representation
    CHECK_THROWS_AS((void)(PiRational(Rational(1), 1) + PiRational(Rational(1), 0)),
                    StructuralError);
}

TEST_CASE("trace of a product is cyclic exactly") {
    auto spec = TraceSpec::unit();
    auto flat = FockContext::build(Model::Cn, 1, Rational(1) / 2, 4);
    auto disc = FockContext::build(Model::CHn, 1, Rational(1) / 5, 4);

    Rng rng(524287);
    for (int rep = 0; rep < 25; ++rep) {
        FockMatrix A = rand_matrix(rng, 1, 4, 4, 5);
        FockMatrix B = rand_matrix(rng, 1, 4, 4, 5);
        CHECK(cyclicity_check(flat, A, B, spec).is_zero());
        CHECK(cyclicity_check(disc, A, B, spec).is_zero());
    }

    // two-dimensional model as well
    auto flat2 = FockContext::build(Model::Cn, 2, Rational(1), 3);
    for (int rep = 0; rep < 5; ++rep) {
        FockMatrix A = rand_matrix(rng, 2, 3, 3, 5);
        FockMatrix B = rand_matrix(rng, 2, 3, 3, 5);
        CHECK(cyclicity_check(flat2, A, B, spec).is_zero());
    }

    // raising against lowering: both products are diagonal with equal traces
    FockMatrix up(1, kInfDeg, kInfDeg), down(1, kInfDeg, kInfDeg);
    for (int k = 0; k <= 3; ++k) {
        up.add(mi(k + 1), mi(k), Rational(1) / factorial(k));
        down.add(mi(k), mi(k + 1), Rational(1) / factorial(k));
    }
    CHECK(cyclicity_check(flat, up, down, spec).is_zero());

    FockMatrix A = rand_matrix(rng, 1, 4, 4, 6);
    CHECK(cyclicity_check(flat, A, A, spec).is_zero());
}

TEST_CASE("number operator commutators are traceless") {
    auto spec = TraceSpec::unit();
    auto ctx = FockContext::build(Model::Cn, 2, Rational(1), 3);
    auto idx = block_indices(2, 3);
    for (int i = 0; i < 2; ++i) {
        FockMatrix N = number_op(ctx, i, 3);
        for (const auto& m : idx)
            for (const auto& n : idx) {
                FockMatrix E = basis(m, n);
                FockMatrix comm = fock_mul(ctx, N, E) - fock_mul(ctx, E, N);
                CHECK(sp_trace(comm, spec).is_zero());
                // the commutator itself is the scaled basis element, so a
                // nonzero trace would force the off-diagonal trace to vanish
                CHECK(equal_on_common(comm, E.scaled(Rational(m[i] - n[i]))));
            }
    }
}

TEST_CASE("quadrature rules hit their stated exactness degree") {
    auto lag = QuadratureRule::gauss_laguerre(24);
    CHECK(lag.exact_degree() == 47);
    double fact = 1.0;
    for (int k = 1; k <= 15; ++k) fact *= k;
    double got = lag.integrate([](double t) { return std::pow(t, 15); });
    CHECK(got == doctest::Approx(fact).epsilon(1e-10));

    auto leg = QuadratureRule::gauss_legendre01(16);
    for (int k : {0, 1, 7, 20, 31}) {
        double m = leg.integrate([&](double u) { return std::pow(u, k); });
        CHECK(m == doctest::Approx(1.0 / (k + 1)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(QuadratureRule::gauss_laguerre(0), StructuralError);
    CHECK_THROWS_AS(QuadratureRule::gauss_legendre01(-2), StructuralError);
}

TEST_CASE("flat quadrature trace reproduces the delta block") {
    // one dimension, scalars through degree 4
    for (int m = 0; m <= 4; ++m)
        for (int n = 0; n <= 4; ++n) {
            double v1 = quad_trace_Cn(mi(m), mi(n), Rational(1));
            double vh = quad_trace_Cn(mi(m), mi(n), Rational(1) / 2);
            if (m == n) {
                CHECK(v1 == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(vh == doctest::Approx(1.0).epsilon(1e-10));
            } else {
                CHECK(v1 == 0.0);
                CHECK(vh == 0.0);
            }
        }

    // two dimensions through total degree 4
    auto idx = block_indices(2, 4);
    for (const auto& m : idx)
        for (const auto& n : idx) {
            double v = quad_trace_Cn(m, n, Rational(2) / 3);
            if (m == n)
                CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
            else
                CHECK(v == 0.0);
        }

    CHECK_THROWS_AS(quad_trace_Cn(mi(1), MultiIndex{1, 0}, Rational(1)), StructuralError);
    CHECK_THROWS_AS(quad_trace_Cn(mi(1), mi(1), Rational(-1)), DomainError);
}

TEST_CASE("disc quadrature trace matches the exact constant") {
    const double pi = std::numbers::pi;
    Rational hb = Rational(1) / 5;

    // raw vacuum integral: 2 pi int_0^1 (1-r^2)^3 r dr = pi / 4
    CHECK(quad_trace_CHn(mi(0), mi(0), hb) == doctest::Approx(pi / 4).epsilon(1e-9));
    CHECK(chn_c0(hb, 1) == PiRational(Rational(1) / 4, 1));

    // every diagonal gives the same constant; off-diagonals vanish exactly
    double c0 = chn_c0(hb, 1).value();
    for (int n = 0; n <= 4; ++n)
        CHECK(quad_trace_CHn(mi(n), mi(n), hb) / c0 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(quad_trace_CHn(mi(1), mi(0), hb) == 0.0);
    CHECK(quad_trace_CHn(mi(0), mi(3), hb) == 0.0);

    // two dimensions: c0 = pi^2 Gamma(3)/Gamma(5) = pi^2/12
    CHECK(chn_c0(hb, 2) == PiRational(Rational(1) / 12, 2));
    MultiIndex zero2(2);
    CHECK(quad_trace_CHn(zero2, zero2, hb) == doctest::Approx(pi * pi / 12).epsilon(1e-9));
    double c02 = chn_c0(hb, 2).value();
    for (const auto& n : block_indices(2, 4))
        CHECK(quad_trace_CHn(n, n, hb) / c02 == doctest::Approx(1.0).epsilon(1e-8));

    // non-integer 1/hbar: the Beta integrand is no longer polynomial but the
    // constant is still exactly rational times pi
    Rational hq = Rational(2) / 9;  // 1/hbar = 9/2
    CHECK(chn_c0(hq, 1) == PiRational(Rational(2) / 7, 1));
    double cq = chn_c0(hq, 1).value();
    for (int n = 0; n <= 3; ++n)
        CHECK(quad_trace_CHn(mi(n), mi(n), hq) / cq == doctest::Approx(1.0).epsilon(1e-8));
    Rational hq2 = Rational(2) / 7;  // 1/hbar = 7/2, two dimensions
    CHECK(chn_c0(hq2, 2) == PiRational(Rational(4) / 15, 2));
    CHECK(quad_trace_CHn(zero2, zero2, hq2) ==
          doctest::Approx(chn_c0(hq2, 2).value()).epsilon(1e-8));

    // integrability frontier: 1/hbar must exceed the dimension
    CHECK_THROWS_AS(quad_trace_CHn(mi(0), mi(0), Rational(1)), DomainError);
    CHECK_THROWS_AS(quad_trace_CHn(zero2, zero2, Rational(1) / 2), DomainError);
    CHECK_THROWS_AS(chn_c0(Rational(1) / 2, 2), DomainError);
    CHECK_THROWS_AS(chn_c0(Rational(1) / 5, 0), StructuralError);
}

TEST_CASE("integral and algebraic traces are proportional") {
    Rational hb = Rational(1) / 5;
    auto spec = TraceSpec::chn_integral(hb, 1);
    CHECK(spec.c_p == PiRational(Rational(1) / 4, 1));

    // a random diagonal element: integrating its function term by term must
    // equal c_0 times the algebraic trace
    Rng rng(262143);
    for (int rep = 0; rep < 4; ++rep) {
        FockMatrix A(1, kInfDeg, kInfDeg);
        double integral = 0.0;
        for (int k = 0; k <= 4; ++k) {
            Rational c = rng.rational();
            if (c == 0) continue;
            A.add(mi(k), mi(k), c);
            // A_k E_{k,k} integrates to A_k k! times the normalized value
            integral += c.convert_to<double>() * factorial(k).convert_to<double>() *
                        quad_trace_CHn(mi(k), mi(k), hb);
        }
        double algebraic = sp_trace(A, spec).value();
        CHECK(integral == doctest::Approx(algebraic).epsilon(1e-9));
    }
}
