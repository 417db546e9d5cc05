#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "kstar/charts.hpp"
#include "kstar/star_product.hpp"
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

Rational pow2(int e) {
    if (e >= 0) return Rational(Integer(1) << e);
    return Rational(1) / Rational(Integer(1) << (-e));
}

// w = 1/(1+u) and phi = -ln(1+u), both truncated at degree cut: the
// projective chart swap written around the point where both charts meet.
AnalyticTransition cp1_swap(int cut) {
    AnalyticTransition t;
    QSeries w(1, cut, kInfDeg);
    QSeries phi(1, cut, kInfDeg);
    for (int k = 0; k <= cut; ++k) {
        Rational sgn = (k % 2 == 0) ? Rational(1) : Rational(-1);
        w.add_term(mi(k), MultiIndex(1), sgn);
        if (k >= 1) phi.add_term(mi(k), MultiIndex(1), sgn / k);
    }
    t.w_of_z = {w};
    t.phi_hol = phi;
    t.base = {Rational(1)};
    return t;
}

AnalyticTransition dilation(const Rational& s) {
    AnalyticTransition t = identity_transition(1);
    t.w_of_z[0] = t.w_of_z[0].scaled(s);
    return t;
}

// h(z, zbar) -> h(s z, s zbar)
QSeries rescale_coords(const QSeries& f, const Rational& s) {
    QSeries r(f.dim(), f.dz(), f.dzb());
    for (const auto& [key, c] : f.terms()) {
        Rational p = 1;
        for (int t = 0; t < key.first.total() + key.second.total(); ++t) p *= s;
        r.add_term(key.first, key.second, c * p);
    }
    return r;
}

}  // namespace

TEST_CASE("square root bookkeeping collapses exactly when it should") {
    SqrtRational a(Rational(1), Rational(4));
    CHECK(a.is_rational());
    CHECK(a.rational() == 2);

    SqrtRational b(Rational(2), Rational(9) / 16);
    CHECK(b.rational() == Rational(3) / 2);

    SqrtRational c(Rational(1), Rational(2));
    CHECK(!c.is_rational());
    CHECK_THROWS_AS((void)c.rational(), StructuralError);

    CHECK((c * c).rational() == 2);
    SqrtRational d(Rational(1), Rational(8));
    CHECK((c * d).rational() == 4);

    SqrtRational e = c + SqrtRational(Rational(2), Rational(2));
    CHECK(e.c == 3);
    CHECK(e.r == 2);
    CHECK((c + SqrtRational(Rational(-1), Rational(2))).is_zero());
    CHECK_THROWS_AS((void)(c + a), StructuralError);

    SqrtRational z(Rational(0), Rational(7));
    CHECK(z.is_zero());
    CHECK(z.r == 1);
    CHECK_THROWS_AS(SqrtRational(Rational(1), Rational(-2)), DomainError);
}

TEST_CASE("transition coefficients: identity, dilation, projective swap") {
    Rational one(1);

    auto cid = transition_coefficients(identity_transition(1), one, 3, 4);
    for (int al = 0; al <= 3; ++al) {
        const QSeries& s = cid.at(mi(al));
        CHECK(s.terms().size() == 1);
        CHECK(s.coeff(mi(al), MultiIndex(1)) == 1);
    }

    auto cdil = transition_coefficients(dilation(Rational(2)), one, 3, 4);
    for (int al = 0; al <= 3; ++al) {
        const QSeries& s = cdil.at(mi(al));
        CHECK(s.terms().size() == 1);
        CHECK(s.coeff(mi(al), MultiIndex(1)) == pow2(al));
    }

    auto cid2 = transition_coefficients(identity_transition(2), one, 2, 3);
    MultiIndex al2{1, 1};
    CHECK(cid2.at(al2).coeff(al2, MultiIndex(2)) == 1);
    CHECK(cid2.at(al2).terms().size() == 1);

    // swap chart: w^alpha e^{-phi/hbar} = (1+u)^{L-alpha}
    const long L = 3;
    auto cswap = transition_coefficients(cp1_swap(6), Rational(1) / L, 4, 5);
    for (int al = 0; al <= 3; ++al) {
        const QSeries& s = cswap.at(mi(al));
        for (int be = 0; be <= 5; ++be)
            CHECK(s.coeff(mi(be), MultiIndex(1)) == binomial(L - al, be));
    }
    // one step past the polynomial range: (1+u)^{-1}
    const QSeries& spast = cswap.at(mi(4));
    for (int be = 0; be <= 5; ++be)
        CHECK(spast.coeff(mi(be), MultiIndex(1)) == (be % 2 == 0 ? Rational(1) : Rational(-1)));

    AnalyticTransition bad = identity_transition(1);
    bad.w_of_z[0] = QSeries::monomial(1, mi(2), MultiIndex(1), Rational(1));
    CHECK_THROWS_AS(transition_coefficients(bad, one, 2, 3), ChartError);

    AnalyticTransition anti = identity_transition(1);
    anti.w_of_z[0].add_term(MultiIndex(1), mi(1), Rational(1));
    CHECK_THROWS_AS(transition_coefficients(anti, one, 2, 3), ChartError);

    AnalyticTransition off = identity_transition(1);
    off.phi_hol = QSeries::monomial(1, MultiIndex(1), MultiIndex(1), Rational(1));
    CHECK_THROWS_AS(transition_coefficients(off, one, 2, 3), ChartError);
}

TEST_CASE("identity chart change produces the identity matrix") {
    auto flat = FockContext::build(Model::Cn, 1, Rational(1), 3);
    TransitionMatrix t = transition_matrix(identity_transition(1), flat, flat);
    CHECK(transition_is_identity(t));
    CHECK(t.bm == 3);
    CHECK(t.aj == 3);

    auto proj = FockContext::build(Model::CPn, 1, Rational(1) / 3, 3);
    CHECK(transition_is_identity(transition_matrix(identity_transition(1), proj, proj)));

    Rng rng(40813);
    FockMatrix A = rand_matrix(rng, 1, 3, 3, 5);
    CHECK(equal_on_common(apply_transition(t, A), A));
}

TEST_CASE("dilation chart change matches direct re-expansion") {
    auto ctx_a = FockContext::build(Model::Cn, 1, Rational(1), 3);
    KahlerPotential quarter{
        QSeries::monomial(1, mi(1), mi(1), Rational(1) / 4), Model::Custom, false};
    auto ctx_b = FockContext::build_custom(quarter, Rational(1), 3);

    TransitionMatrix T = transition_matrix(dilation(Rational(2)), ctx_a, ctx_b);
    for (int m = 0; m <= 3; ++m)
        for (int n = 0; n <= 3; ++n) {
            FockMatrix img = apply_transition(T, basis(mi(m), mi(n)));
            QSeries fn = QSeries::monomial(1, mi(m), mi(n), pow2(m - n));
            CHECK(equal_on_common(img, to_fock(ctx_a, fn)));
            CHECK(T.coeff({mi(m), mi(n)}, {mi(m), mi(n)}).rational() == pow2(m - n));
        }
    CHECK(T.a.size() == 16);

    // linearity on a random block element
    Rng rng(52901);
    FockMatrix A = rand_matrix(rng, 1, 3, 3, 6);
    FockMatrix img = apply_transition(T, A);
    for (const auto& [key, c] : A.a)
        CHECK(img.coeff(key.first, key.second) ==
              c * pow2(key.first.total() - key.second.total()));
}

TEST_CASE("star products computed in either dilation chart agree") {
    // pulling back f *_w g along w = 2z equals the star product of the
    // pullbacks taken with the rescaled potential
    KahlerData kd_a = KahlerData::build(Model::Cn, 1, 6, 6, 0);
    KahlerPotential quarter{
        QSeries::monomial(1, mi(1), mi(1), Rational(1) / 4), Model::Custom, false};
    KahlerData kd_b = KahlerData::build_custom(quarter, 6, 6);
    StarContext sa(kd_a, 3);
    StarContext sb(kd_b, 3);

    Rng rng(61507);
    for (int rep = 0; rep < 4; ++rep) {
        QSeries f = rng.series(1, 2, 2, 3);
        QSeries g = rng.series(1, 2, 2, 3);
        FormalSeries in_b = star_formal(f, g, sb);
        FormalSeries in_a =
            star_formal(rescale_coords(f, Rational(2)), rescale_coords(g, Rational(2)), sa);
        FormalSeries pulled(1, in_b.order(), kInfDeg, kInfDeg);
        for (int t = 0; t <= in_b.order(); ++t) pulled.at(t) = rescale_coords(in_b.at(t), Rational(2));
        CHECK(equal_on_common(pulled, in_a));
    }
}

TEST_CASE("forward and backward dilation compose to the identity") {
    auto ctx_a = FockContext::build(Model::Cn, 1, Rational(1), 3);
    KahlerPotential quarter{
        QSeries::monomial(1, mi(1), mi(1), Rational(1) / 4), Model::Custom, false};
    auto ctx_b = FockContext::build_custom(quarter, Rational(1), 3);

    TransitionMatrix T1 = transition_matrix(dilation(Rational(2)), ctx_a, ctx_b);
    TransitionMatrix T2 = transition_matrix(dilation(Rational(1) / 2), ctx_b, ctx_a);
    CHECK(transition_is_identity(compose_transitions(T2, T1)));
    CHECK(transition_is_identity(compose_transitions(T1, T2)));
}

TEST_CASE("finite projective transition: involution, bijection, homomorphism") {
    const long L = 3;

    FiniteTransition t00 = cpn_transition_finite(0, 1, 1, mi(0), mi(0));
    CHECK(t00.m == mi(1));
    CHECK(t00.n == mi(1));
    CHECK(t00.factor == 1);

    FiniteTransition tLL = cpn_transition_finite(0, 1, L, mi(3), mi(3));
    CHECK(tLL.m == mi(0));
    CHECK(tLL.n == mi(0));
    CHECK(tLL.factor == Rational(1) / 6);

    std::set<std::pair<MultiIndex, MultiIndex>> images;
    for (int m = 0; m <= L; ++m)
        for (int n = 0; n <= L; ++n) {
            FiniteTransition fwd = cpn_transition_finite(0, 1, L, mi(m), mi(n));
            FiniteTransition back = cpn_transition_finite(1, 0, L, fwd.m, fwd.n);
            CHECK(back.m == mi(m));
            CHECK(back.n == mi(n));
            CHECK(fwd.factor * back.factor == 1);
            images.emplace(fwd.m, fwd.n);
        }
    CHECK(images.size() == 16);

    CHECK_THROWS_AS(cpn_transition_finite(0, 1, L, mi(4), mi(0)), ChartError);
    CHECK_THROWS_AS(cpn_transition_finite(0, 0, L, mi(0), mi(0)), StructuralError);

    auto ctx = FockContext::build(Model::CPn, 1, Rational(1) / L, static_cast<int>(L));
    REQUIRE(ctx.finite_level());

    // vacuum goes to the top of the block
    FockMatrix vtop = cpn_transition_apply(vacuum_matrix(ctx), 0, 1, L);
    CHECK(vtop.a.size() == 1);
    CHECK(vtop.coeff(mi(3), mi(3)) == Rational(1) / 6);

    // transporting coefficients commutes with the product
    Rng rng(70117);
    for (int rep = 0; rep < 5; ++rep) {
        FockMatrix A = rand_matrix(rng, 1, 3, 3, 5);
        FockMatrix B = rand_matrix(rng, 1, 3, 3, 5);
        FockMatrix lhs = cpn_transition_apply(fock_mul(ctx, A, B), 0, 1, L);
        FockMatrix rhs =
            fock_mul(ctx, cpn_transition_apply(A, 0, 1, L), cpn_transition_apply(B, 0, 1, L));
        CHECK(equal_on_common(lhs, rhs));
        CHECK((lhs - rhs).stored_zero());
    }

    // the explicit matrix with square-root bookkeeping agrees with the index map
    TransitionMatrix TM = cpn_finite_transition_matrix(0, 1, L, 1);
    FockMatrix A = rand_matrix(rng, 1, 3, 3, 6);
    CHECK(equal_on_common(apply_transition(TM, A), cpn_transition_apply(A, 0, 1, L)));

    TransitionMatrix TMback = cpn_finite_transition_matrix(1, 0, L, 1);
    CHECK(transition_is_identity(compose_transitions(TMback, TM)));
    CHECK(transition_is_identity(compose_transitions(TM, TMback)));
}

TEST_CASE("finite projective transition in two dimensions") {
    const long L = 2;
    auto ctx = FockContext::build(Model::CPn, 2, Rational(1) / L, static_cast<int>(L));
    REQUIRE(ctx.finite_level());

    std::set<std::pair<MultiIndex, MultiIndex>> images;
    int pairs = 0;
    for_each_multi_index(2, static_cast<int>(L), [&](const MultiIndex& m) {
        for_each_multi_index(2, static_cast<int>(L), [&](const MultiIndex& n) {
            ++pairs;
            FiniteTransition fwd = cpn_transition_finite(0, 2, L, m, n);
            CHECK(fwd.m.total() <= L);
            CHECK(fwd.n.total() <= L);
            FiniteTransition back = cpn_transition_finite(2, 0, L, fwd.m, fwd.n);
            CHECK(back.m == m);
            CHECK(back.n == n);
            CHECK(fwd.factor * back.factor == 1);
            images.emplace(fwd.m, fwd.n);
        });
    });
    CHECK(static_cast<int>(images.size()) == pairs);

    Rng rng(81203);
    for (int rep = 0; rep < 3; ++rep) {
        FockMatrix A = rand_matrix(rng, 2, 2, 2, 4);
        FockMatrix B = rand_matrix(rng, 2, 2, 2, 4);
        FockMatrix lhs = cpn_transition_apply(fock_mul(ctx, A, B), 0, 2, L);
        FockMatrix rhs =
            fock_mul(ctx, cpn_transition_apply(A, 0, 2, L), cpn_transition_apply(B, 0, 2, L));
        CHECK((lhs - rhs).stored_zero());
    }
}

TEST_CASE("block projection is idempotent and respects products") {
    const long L = 3;
    Rng rng(90125);
    FockMatrix wide(1, 5, 5);
    for (int t = 0; t < 8; ++t) wide.add(rng.index(1, 5), rng.index(1, 5), rng.rational());

    FockMatrix proj = f_l_project(wide, L);
    CHECK(proj.cz == kInfDeg);
    CHECK(proj.czb == kInfDeg);
    CHECK(proj.max_row_degree() <= L);
    CHECK(proj.max_col_degree() <= L);
    CHECK(equal_on_common(f_l_project(proj, L), proj));
    for (const auto& [key, c] : proj.a)
        CHECK(c == wide.coeff(key.first, key.second));

    auto ctx = FockContext::build(Model::CPn, 1, Rational(1) / L, static_cast<int>(L));
    FockMatrix A = rand_matrix(rng, 1, 3, 3, 5);
    FockMatrix B = rand_matrix(rng, 1, 3, 3, 5);
    FockMatrix prod = fock_mul(ctx, A, B);
    CHECK(equal_on_common(f_l_project(prod, L), prod));

    // level-limited columns represent the zero function, so dropping them
    // does not change the represented element
    FockMatrix outside = basis(mi(1), mi(4));
    QSeries fn = from_fock(ctx, outside);
    CHECK(fn.stored_zero());

    int pairs = 0;
    for_each_multi_index(1, static_cast<int>(L), [&](const MultiIndex&) {
        for_each_multi_index(1, static_cast<int>(L), [&](const MultiIndex&) { ++pairs; });
    });
    CHECK(pairs == 16);
}

TEST_CASE("shifted operators reproduce the block commutator") {
    for (long L = 1; L <= 3; ++L) {
        auto ctx = FockContext::build(Model::CPn, 1, Rational(1) / L, static_cast<int>(L));
        auto [cre, ann] = shifted_operators(ctx, 0);
        if (L == 1) {
            CHECK(cre.a.size() == 1);
            CHECK(cre.coeff(mi(1), mi(0)) == 1);
            CHECK(ann.a.size() == 1);
            CHECK(ann.coeff(mi(0), mi(1)) == 1);
        }
        FockMatrix comm = fock_mul(ctx, ann, cre) - fock_mul(ctx, cre, ann);
        FockMatrix closed = shifted_commutator_closed(ctx, 0, 0);
        CHECK((comm - closed).stored_zero());

        // trace of a commutator over the finite block vanishes
        Rational tr = 0;
        for (const auto& [key, c] : comm.a)
            if (key.first == key.second) tr += c * key.first.fact();
        CHECK(tr == 0);
    }

    // normalized-basis display at L = 1: diag(1, -1)
    auto ctx1 = FockContext::build(Model::CPn, 1, Rational(1), 1);
    auto [cre, ann] = shifted_operators(ctx1, 0);
    FockMatrix comm = fock_mul(ctx1, ann, cre) - fock_mul(ctx1, cre, ann);
    CHECK(comm.coeff(mi(0), mi(0)) * factorial(0) == 1);
    CHECK(comm.coeff(mi(1), mi(1)) * factorial(1) == -1);

    // mixed slots on the two dimensional model: the unrestricted shifts
    // commute, but the block restriction leaves a rim defect
    auto ctx2 = FockContext::build(Model::CPn, 2, Rational(1) / 2, 2);
    auto [cre0, ann0] = shifted_operators(ctx2, 0);
    auto [cre1, ann1] = shifted_operators(ctx2, 1);
    FockMatrix mixed = fock_mul(ctx2, ann0, cre1) - fock_mul(ctx2, cre1, ann0);
    CHECK(!mixed.stored_zero());
    CHECK((mixed - shifted_commutator_closed(ctx2, 0, 1)).stored_zero());
    CHECK(mixed.coeff(MultiIndex{1, 1}, MultiIndex{2, 0}) == -1);
    CHECK(mixed.coeff(MultiIndex{0, 2}, MultiIndex{1, 1}) == -1);
    FockMatrix diag1 = fock_mul(ctx2, ann1, cre1) - fock_mul(ctx2, cre1, ann1);
    CHECK((diag1 - shifted_commutator_closed(ctx2, 1, 1)).stored_zero());

    // an oversized block request clamps to the level and still carries the
    // finite algebra, so the shifts come out the same
    auto ctx0 = FockContext::build(Model::CPn, 1, Rational(1), 5);
    auto [c0, a0] = shifted_operators(ctx0, 0);
    CHECK(c0.a.size() == 1);
    CHECK(c0.coeff(mi(1), mi(0)) == 1);
    CHECK(a0.coeff(mi(0), mi(1)) == 1);

    auto flat = FockContext::build(Model::Cn, 1, Rational(1), 2);
    CHECK_THROWS_AS(shifted_operators(flat, 0), DomainError);
}

TEST_CASE("translation breaks the flat chart basis") {
    Rational s(1);
    Rational hbar(1);
    QSeries r = cylinder_shift_residual(hbar, s, 4);
    CHECK(!r.stored_zero());
    CHECK(r.coeff(MultiIndex(1), MultiIndex(1)) == s * s);
    CHECK(r.coeff(mi(1), mi(1)) == 0);
    CHECK(r.coeff(mi(1), MultiIndex(1)) == s - s * s * s / hbar);

    Rational tau = Rational(22) / 7;
    QSeries r2 = cylinder_shift_residual(Rational(1) / 2, tau, 4);
    CHECK(!r2.stored_zero());
    CHECK(r2.coeff(MultiIndex(1), MultiIndex(1)) == tau * tau);

    CHECK_THROWS_AS(cylinder_shift_residual(hbar, Rational(0), 4), DomainError);
}

TEST_CASE("transition construction rejects inconsistent inputs") {
    auto ctx_a = FockContext::build(Model::Cn, 1, Rational(1), 3);
    auto ctx_half = FockContext::build(Model::Cn, 1, Rational(1) / 2, 3);
    CHECK_THROWS_AS(transition_matrix(identity_transition(1), ctx_a, ctx_half),
                    StructuralError);

    AnalyticTransition shifted = identity_transition(1);
    shifted.base[0] = Rational(1);
    CHECK_THROWS_AS(transition_matrix(shifted, ctx_a, ctx_a), ChartError);

    QSeries lopsided = QSeries::monomial(1, mi(1), mi(1), Rational(1));
    lopsided.add_term(mi(2), mi(1), Rational(1) / 10);
    lopsided.add_term(mi(1), mi(2), Rational(1) / 10);
    KahlerPotential bent{lopsided, Model::Custom, false};
    auto ctx_bent = FockContext::build_custom(bent, Rational(1), 2);
    CHECK_THROWS_AS(transition_matrix(identity_transition(1), ctx_a, ctx_bent), ChartError);

    TransitionMatrix T = transition_matrix(identity_transition(1), ctx_a, ctx_a);
    FockMatrix big = basis(mi(4), mi(0));
    CHECK_THROWS_AS(apply_transition(T, big), RepresentationFailureError);
    FockMatrix shallow(1, 2, 2);
    shallow.add(mi(1), mi(1), Rational(1));
    CHECK_THROWS_AS(apply_transition(T, shallow), RepresentationFailureError);
}
