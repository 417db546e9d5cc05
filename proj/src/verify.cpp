#include "kstar/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <future>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <utility>

#include "kstar/charts.hpp"
#include "kstar/fock.hpp"
#include "kstar/trace.hpp"

namespace kstar {

namespace {

// Counts the identities a criterion checks and remembers the first miss so
// the report says which equation broke, not just that one did.
struct Tally {
    int checked = 0;
    int failed = 0;
    std::string first;

    void expect(bool ok, const std::string& what) {
        ++checked;
        if (!ok && failed++ == 0) first = what;
    }
};

QSeries zmon(int dim, int i) {
    return QSeries::monomial(dim, MultiIndex::unit(dim, i), MultiIndex(dim), Rational(1));
}

QSeries zbmon(int dim, int i) {
    return QSeries::monomial(dim, MultiIndex(dim), MultiIndex::unit(dim, i), Rational(1));
}

bool certified_through(const FormalSeries& f, int dz, int dzb) {
    for (int t = 0; t <= f.order(); ++t)
        if (f.at(t).dz() < dz || f.at(t).dzb() < dzb) return false;
    return true;
}

// flat metric plus a quartic bump in the first coordinate
KahlerPotential quartic_potential() {
    QSeries phi(2, kInfDeg, kInfDeg);
    phi.add_term(MultiIndex{1, 0}, MultiIndex{1, 0}, Rational(1));
    phi.add_term(MultiIndex{0, 1}, MultiIndex{0, 1}, Rational(1));
    phi.add_term(MultiIndex{2, 0}, MultiIndex{2, 0}, Rational(1) / 10);
    return KahlerPotential{phi, Model::Custom, false};
}

// radial single-variable potential with a quartic term
KahlerPotential radial_quartic_potential() {
    QSeries phi(1, kInfDeg, kInfDeg);
    phi.add_term(MultiIndex{1}, MultiIndex{1}, Rational(1));
    phi.add_term(MultiIndex{2}, MultiIndex{2}, Rational(1) / 10);
    return KahlerPotential{phi, Model::Custom, false};
}

FockMatrix unit_basis(int dim, const MultiIndex& m, const MultiIndex& n) {
    FockMatrix a(dim, kInfDeg, kInfDeg);
    a.add(m, n, Rational(1));
    return a;
}

struct VerifyRng {
    explicit VerifyRng(std::uint64_t seed) : eng(seed) {}

    Rational rational() {
        std::uniform_int_distribution<int> num(-3, 3);
        std::uniform_int_distribution<int> den(1, 3);
        return Rational(num(eng)) / den(eng);
    }

    MultiIndex index(int dim, int max_total) {
        std::uniform_int_distribution<int> d(0, max_total);
        MultiIndex m(dim);
        int budget = d(eng);
        for (int i = 0; i < dim && budget > 0; ++i) {
            std::uniform_int_distribution<int> u(0, budget);
            m.at(i) = u(eng);
            budget -= m[i];
        }
        return m;
    }

    QSeries series(int dim, int maxz, int maxzb, int nterms) {
        QSeries s(dim, kInfDeg, kInfDeg);
        for (int t = 0; t < nterms; ++t) s.add_term(index(dim, maxz), index(dim, maxzb), rational());
        return s;
    }

    FockMatrix matrix(int dim, int maxrow, int maxcol, int nterms) {
        FockMatrix a(dim, kInfDeg, kInfDeg);
        for (int t = 0; t < nterms; ++t) a.add(index(dim, maxrow), index(dim, maxcol), rational());
        return a;
    }

    std::mt19937_64 eng;
};

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t mix) {
    return mix == 0 ? base : base ^ (mix * 0x9e3779b97f4a7c15ULL);
}

std::string done(const Tally& t, const std::string& extra = "") {
    std::ostringstream os;
    if (t.failed == 0) {
        os << t.checked << " identities, residual 0";
        if (!extra.empty()) os << "; " << extra;
    } else {
        os << t.failed << " of " << t.checked << " identities failed; first: " << t.first;
    }
    return os.str();
}

// 1. the six commutation relations between the coordinate and gradient
// generators on four two-dimensional geometries
void criterion_1(Tally& t, std::string& extra, std::uint64_t /*seed*/) {
    std::vector<std::pair<std::string, KahlerData>> kds;
    kds.emplace_back("flat", KahlerData::build(Model::Cn, 2, 5, 5, 8));
    kds.emplace_back("projective", KahlerData::build(Model::CPn, 2, 5, 5, 8));
    kds.emplace_back("hyperbolic", KahlerData::build(Model::CHn, 2, 5, 5, 8));
    kds.emplace_back("quartic", KahlerData::build_custom(quartic_potential(), 5, 5, 8));
    for (auto& [label, kd] : kds) {
        StarContext ctx(kd, 4);
        auto comm = [&](const QSeries& a, const QSeries& b) {
            return star_formal(a, b, ctx) - star_formal(b, a, ctx);
        };
        std::vector<QSeries> z, zb, dphi, dphib;
        for (int i = 0; i < 2; ++i) {
            z.push_back(zmon(2, i));
            zb.push_back(zbmon(2, i));
            dphi.push_back(kd.phi.phi.diff(i, false));
            dphib.push_back(kd.phi.phi.diff(i, true));
        }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                std::string at = label + " (" + std::to_string(i) + "," + std::to_string(j) + ")";
                FormalSeries c1 = comm(dphi[i], z[j]);
                FormalSeries c2 = comm(zb[i], dphib[j]);
                QSeries want = constant_series(2, i == j ? Rational(1) : Rational(0));
                bool ok1 = c1.at(0).stored_zero() && equal_on_common(c1.at(1), want);
                bool ok2 = c2.at(0).stored_zero() && equal_on_common(c2.at(1), want);
                for (int k = 2; k <= 4; ++k) {
                    ok1 = ok1 && c1.at(k).stored_zero();
                    ok2 = ok2 && c2.at(k).stored_zero();
                }
                t.expect(ok1 && certified_through(c1, 5, 5), "[grad_i, z_j] at " + at);
                t.expect(ok2 && certified_through(c2, 5, 5), "[zbar_i, gradbar_j] at " + at);
                t.expect(comm(z[i], z[j]).stored_zero(), "[z,z] at " + at);
                t.expect(comm(dphi[i], dphi[j]).stored_zero(), "[grad,grad] at " + at);
                t.expect(comm(zb[i], zb[j]).stored_zero(), "[zbar,zbar] at " + at);
                t.expect(comm(dphib[i], dphib[j]).stored_zero(), "[gradbar,gradbar] at " + at);
            }
    }
    extra = "4 geometries, order 4, cutoffs (5,5)";
}

// 2. associativity on seeded random triples over the quartic potential
void criterion_2(Tally& t, std::string& extra, std::uint64_t seed) {
    KahlerData kd = KahlerData::build_custom(quartic_potential(), 4, 4, 8);
    StarContext ctx(kd, 3);
    VerifyRng rng(mix_seed(20201, seed));
    for (int trial = 0; trial < 20; ++trial) {
        QSeries f = rng.series(2, 2, 2, 4);
        QSeries g = rng.series(2, 2, 2, 4);
        QSeries h = rng.series(2, 2, 2, 4);
        FormalSeries left =
            star_formal(star_formal(f, g, ctx), FormalSeries::from_series(h, 3), ctx);
        FormalSeries right =
            star_formal(FormalSeries::from_series(f, 3), star_formal(g, h, ctx), ctx);
        t.expect(equal_on_common(left, right) && certified_through(left - right, 2, 2),
                 "triple " + std::to_string(trial));
    }
    extra = "20 seeded triples, order 3";
}

// 3. recursive product equals the closed formulas
void criterion_3(Tally& t, std::string& extra, std::uint64_t seed) {
    VerifyRng rng(mix_seed(30301, seed));
    for (int dim : {1, 2}) {
        KahlerData kd = KahlerData::build(Model::Cn, dim, 6, 6, 4);
        StarContext ctx(kd, 7);
        for (int rep = 0; rep < 4; ++rep) {
            QSeries f = rng.series(dim, 3, 3, 4);
            QSeries g = rng.series(dim, 3, 3, 4);
            FormalSeries rec = star_formal(f, g, ctx);
            FormalSeries closed = star_closed_cn(f, g, 7);
            bool ok = true;
            for (int k = 0; k <= 7; ++k) ok = ok && equal_on_common(rec.at(k), closed.at(k));
            // derivative orders past the bidegree die, so the grading is
            // supported in low orders only
            for (int k = 4; k <= 7; ++k) ok = ok && closed.at(k).stored_zero();
            t.expect(ok, "flat closed form, dim " + std::to_string(dim));
        }
    }
    for (Model m : {Model::CPn, Model::CHn}) {
        KahlerData kd = KahlerData::build(m, 1, 5, 5, 8);
        StarContext ctx(kd, 3);
        for (int rep = 0; rep < 4; ++rep) {
            QSeries f = rng.series(1, 2, 2, 4);
            QSeries g = rng.series(1, 2, 2, 4);
            FormalSeries rec = star_formal(f, g, ctx);
            FormalSeries closed = star_closed_fubini(m, f, g, kd, 3);
            bool ok = true;
            for (int k = 0; k <= 3; ++k) ok = ok && equal_on_common(rec.at(k), closed.at(k));
            t.expect(ok, std::string("covariant closed form, ") + model_name(m));
        }
    }
    extra = "flat all orders; curved line models through order 3";
}

// 4. coefficient-matrix closed forms on the level-limited and disc models
void criterion_4(Tally& t, std::string& extra, std::uint64_t /*seed*/) {
    for (int dim : {1, 2})
        for (long L : {1L, 2L, 3L, 5L}) {
            auto ctx = FockContext::build(Model::CPn, dim, Rational(1) / L, static_cast<int>(L));
            bool ok = true;
            for_each_multi_index(dim, ctx.fdeg + 1, [&](const MultiIndex& m) {
                for_each_multi_index(dim, ctx.fdeg + 1, [&](const MultiIndex& n) {
                    Rational want = 0;
                    if (m == n && m.total() <= L)
                        want = gamma_ratio_falling(Rational(L), m.total()) / m.fact();
                    ok = ok && (ctx.H.at(m, n) == want);
                });
            });
            t.expect(ok, "projective block N=" + std::to_string(dim) + " L=" + std::to_string(L));
        }
    auto ch = FockContext::build(Model::CHn, 1, Rational(1) / 5, 6);
    bool ok = true;
    for (int mm = 0; mm <= ch.fdeg + 1; ++mm)
        for (int nn = 0; nn <= ch.fdeg + 1; ++nn) {
            Rational want = 0;
            if (mm == nn) want = gamma_ratio_rising(Rational(5), mm) / factorial(mm);
            ok = ok && (ch.H.at(MultiIndex{mm}, MultiIndex{nn}) == want);
        }
    t.expect(ok, "disc rising-factorial diagonal");
    extra = "rising-factorial convention on the disc (alternating-sign form folded in)";
}

// 5. fock algebra identities and completeness
void criterion_5(Tally& t, std::string& extra, std::uint64_t seed) {
    std::vector<std::pair<std::string, FockContext>> ctxs;
    ctxs.emplace_back("flat h=1", FockContext::build(Model::Cn, 1, Rational(1), 4));
    ctxs.emplace_back("flat h=1/2", FockContext::build(Model::Cn, 1, Rational(1) / 2, 4));
    ctxs.emplace_back("projective L=3", FockContext::build(Model::CPn, 1, Rational(1) / 3, 3));
    ctxs.emplace_back("disc 1/h=5", FockContext::build(Model::CHn, 1, Rational(1) / 5, 4));
    VerifyRng rng(mix_seed(50501, seed));
    for (auto& [label, ctx] : ctxs) {
        FockMatrix vac = vacuum_matrix(ctx);
        t.expect(equal_on_common(fock_mul(ctx, vac, vac), vac), label + ": vacuum idempotent");

        bool delta_ok = true;
        for (int mm = 0; mm <= 2; ++mm)
            for (int nn = 0; nn <= ctx.block && nn <= 3; ++nn)
                for (int kk = 0; kk <= ctx.block && kk <= 3; ++kk)
                    for (int ll = 0; ll <= 2; ++ll) {
                        FockMatrix prod = fock_mul(ctx, unit_basis(1, MultiIndex{mm}, MultiIndex{nn}),
                                                   unit_basis(1, MultiIndex{kk}, MultiIndex{ll}));
                        FockMatrix want(1, kInfDeg, kInfDeg);
                        if (nn == kk) want.add(MultiIndex{mm}, MultiIndex{ll}, factorial(nn));
                        delta_ok = delta_ok && (prod - want).stored_zero();
                    }
        t.expect(delta_ok, label + ": delta product rule");

        bool word_ok = true;
        for (int mm = 0; mm <= 3; ++mm)
            for (int nn = 0; nn <= ctx.block && nn <= 3; ++nn) {
                std::vector<WordOp> ops;
                for (int k = 0; k < mm; ++k) ops.push_back({Gen::Z, 0, OperatorSide::Left});
                for (int k = 0; k < nn; ++k) ops.push_back({Gen::DPhi, 0, OperatorSide::Right});
                FockMatrix built = apply_word(ctx, vac, ops);
                word_ok =
                    word_ok && equal_on_common(built, unit_basis(1, MultiIndex{mm}, MultiIndex{nn}));
            }
        t.expect(word_ok, label + ": creation words build the basis");

        bool absorb_ok = true;
        for (int rep = 0; rep < 3; ++rep) {
            QSeries f = rng.series(1, 3, ctx.block, 5);
            absorb_ok = absorb_ok &&
                        equal_on_common(apply_function(ctx, vac, f, OperatorSide::Right),
                                        to_fock(ctx, f.pure_part(false))) &&
                        equal_on_common(apply_function(ctx, vac, f, OperatorSide::Left),
                                        to_fock(ctx, f.pure_part(true)));
        }
        t.expect(absorb_ok, label + ": vacuum absorbs one-sided functions");

        int d = std::min(4, ctx.block);
        t.expect(completeness_defect(ctx, d).truncated(d, d).stored_zero(),
                 label + ": completeness through the block");
    }
    extra = "4 models";
}

// 6. generator actions along the table route and the weight-coefficient route
void criterion_6(Tally& t, std::string& extra, std::uint64_t seed) {
    std::vector<std::pair<std::string, FockContext>> ctxs;
    ctxs.emplace_back("flat", FockContext::build(Model::Cn, 1, Rational(1) / 2, 3));
    ctxs.emplace_back("projective", FockContext::build(Model::CPn, 1, Rational(1) / 3, 3));
    ctxs.emplace_back("disc", FockContext::build(Model::CHn, 1, Rational(1) / 5, 3));
    VerifyRng rng(mix_seed(60601, seed));
    for (auto& [label, ctx] : ctxs)
        for (int rep = 0; rep < 4; ++rep) {
            FockMatrix a = rng.matrix(1, 2, 2, 5);
            for (auto [g, side] : {std::pair{Gen::Z, OperatorSide::Left},
                                   std::pair{Gen::DPhi, OperatorSide::Left},
                                   std::pair{Gen::Zbar, OperatorSide::Right},
                                   std::pair{Gen::DPhiBar, OperatorSide::Right}}) {
                FockMatrix direct = apply_generator(ctx, a, g, 0, side);
                FockMatrix weighted = apply_weighted(ctx, a, g, 0, side);
                t.expect(equal_on_common(direct, weighted) &&
                             min_cutoff(direct.czb, weighted.czb) >= 2,
                         label + ": generator two-path");
            }
        }
    extra = "4 generator/side pairs x 3 models, block (3,3)";
}

// 7. finite projective transition coherence at level 3
void criterion_7(Tally& t, std::string& extra, std::uint64_t seed) {
    const long L = 3;
    bool inv_ok = true, factor_ok = true;
    for (int mm = 0; mm <= 3; ++mm)
        for (int nn = 0; nn <= 3; ++nn) {
            FiniteTransition f = cpn_transition_finite(0, 1, L, MultiIndex{mm}, MultiIndex{nn});
            FiniteTransition b = cpn_transition_finite(1, 0, L, f.m, f.n);
            inv_ok = inv_ok && b.m == MultiIndex{mm} && b.n == MultiIndex{nn};
            factor_ok = factor_ok && (f.factor * b.factor == 1);
        }
    t.expect(inv_ok, "index involution on the 4x4 block");
    t.expect(factor_ok, "transport factors invert exactly");

    auto ctx = FockContext::build(Model::CPn, 1, Rational(1) / L, static_cast<int>(L));
    VerifyRng rng(mix_seed(70701, seed));
    bool hom_ok = true;
    for (int rep = 0; rep < 5; ++rep) {
        FockMatrix A = rng.matrix(1, 3, 3, 4);
        FockMatrix B = rng.matrix(1, 3, 3, 4);
        FockMatrix lhs = cpn_transition_apply(fock_mul(ctx, A, B), 0, 1, L);
        FockMatrix rhs =
            fock_mul(ctx, cpn_transition_apply(A, 0, 1, L), cpn_transition_apply(B, 0, 1, L));
        hom_ok = hom_ok && (lhs - rhs).stored_zero();
    }
    t.expect(hom_ok, "transport respects the matrix product");

    TransitionMatrix fwd = cpn_finite_transition_matrix(0, 1, L, 1);
    TransitionMatrix back = cpn_finite_transition_matrix(1, 0, L, 1);
    t.expect(transition_is_identity(compose_transitions(back, fwd)), "T then T-inverse");
    t.expect(transition_is_identity(compose_transitions(fwd, back)), "T-inverse then T");
    extra = "level 3, one dimension";
}

// 8. shifted-operator commutator against the closed block form
void criterion_8(Tally& t, std::string& extra, std::uint64_t /*seed*/) {
    for (long L : {1L, 2L, 3L}) {
        auto ctx = FockContext::build(Model::CPn, 1, Rational(1) / L, static_cast<int>(L));
        auto [cre, ann] = shifted_operators(ctx, 0);
        FockMatrix comm = fock_mul(ctx, ann, cre) - fock_mul(ctx, cre, ann);
        t.expect((comm - shifted_commutator_closed(ctx, 0, 0)).stored_zero(),
                 "level " + std::to_string(L));
    }
    extra = "levels 1..3";
}

// 9. quadrature traces and exact cyclicity
void criterion_9(Tally& t, std::string& extra, std::uint64_t seed) {
    double vac = quad_trace_CHn(MultiIndex{0}, MultiIndex{0}, Rational(1) / 5);
    double dev_vac = std::abs(vac - std::numbers::pi / 4);
    t.expect(dev_vac < 1e-9, "disc vacuum integral vs pi/4");

    double worst = 0.0;
    for (int dim : {1, 2})
        for (const Rational& hb : {Rational(1), Rational(1) / 2}) {
            std::vector<MultiIndex> idx;
            for_each_multi_index(dim, 3, [&](const MultiIndex& n) { idx.push_back(n); });
            for (const auto& m : idx)
                for (const auto& n : idx) {
                    double v = quad_trace_Cn(m, n, hb);
                    double dev = std::abs(v - (m == n ? 1.0 : 0.0));
                    worst = std::max(worst, dev);
                }
        }
    t.expect(worst < 1e-10, "flat delta block");

    auto spec = TraceSpec::unit();
    auto ctx = FockContext::build(Model::Cn, 1, Rational(1) / 2, 4);
    VerifyRng rng(mix_seed(90901, seed));
    bool cyc_ok = true;
    for (int rep = 0; rep < 50; ++rep) {
        FockMatrix A = rng.matrix(1, 4, 4, 5);
        FockMatrix B = rng.matrix(1, 4, 4, 5);
        cyc_ok = cyc_ok && cyclicity_check(ctx, A, B, spec).is_zero();
    }
    t.expect(cyc_ok, "cyclicity on 50 seeded pairs");
    std::ostringstream os;
    os << "vacuum dev " << dev_vac << ", delta-block dev " << worst << ", cyclicity exact";
    extra = os.str();
}

// 10. radial potentials: diagonal coefficient matrix and its normalization
void criterion_10(Tally& t, std::string& extra, std::uint64_t /*seed*/) {
    std::vector<std::pair<std::string, FockContext>> ctxs;
    ctxs.emplace_back("flat h=1", FockContext::build(Model::Cn, 1, Rational(1), 4));
    ctxs.emplace_back("flat N=2", FockContext::build(Model::Cn, 2, Rational(1) / 2, 3));
    ctxs.emplace_back("projective L=3", FockContext::build(Model::CPn, 1, Rational(1) / 3, 3));
    ctxs.emplace_back("disc 1/h=5", FockContext::build(Model::CHn, 1, Rational(1) / 5, 4));
    ctxs.emplace_back("radial quartic",
                      FockContext::build_custom(radial_quartic_potential(), Rational(1), 4));
    for (auto& [label, ctx] : ctxs) {
        bool diag_ok = true;
        for_each_multi_index(ctx.dim(), ctx.fdeg, [&](const MultiIndex& m) {
            for_each_multi_index(ctx.dim(), ctx.fdeg, [&](const MultiIndex& n) {
                if (m != n) diag_ok = diag_ok && ctx.H.at(m, n) == 0;
            });
        });
        t.expect(diag_ok, label + ": off-diagonal coefficients vanish");

        bool norm_ok = true;
        for_each_multi_index(ctx.dim(), std::min(2, ctx.block), [&](const MultiIndex& m) {
            for_each_multi_index(ctx.dim(), std::min(2, ctx.block), [&](const MultiIndex& n) {
                Rational cn = n.fact() * ctx.H.at(n, n);
                QSeries got = from_fock(ctx, unit_basis(ctx.dim(), m, n));
                QSeries want = QSeries::monomial(ctx.dim(), m, n, cn, got.dz(), got.dzb());
                norm_ok = norm_ok && equal_on_common(got, want);
            });
        });
        t.expect(norm_ok, label + ": basis functions scale by n! H_nn");
    }
    extra = "normalization fixed as C(n) = n! H_nn; the radial-derivative form of C "
            "disagrees at odd orders and is logged, not asserted";
}

// 11. translated flat chart: the basis is not shift invariant
void criterion_11(Tally& t, std::string& extra, std::uint64_t /*seed*/) {
    for (const Rational& s : {Rational(710) / 113, Rational(22) / 7, Rational(2)}) {
        QSeries r = cylinder_shift_residual(Rational(1), s, 4);
        MultiIndex one{1}, zero{0};
        t.expect(!r.stored_zero() && r.coeff(zero, zero) == s * s,
                 "shift " + to_pq_string(s));
        t.expect(r.coeff(one, zero) == s - s * s * s, "first moment at shift " + to_pq_string(s));
    }
    extra = "residual constant term is shift^2 for every nonzero shift, so the "
            "obstruction covers the true period";
}

using CriterionFn = void (*)(Tally&, std::string&, std::uint64_t);

struct Entry {
    const char* name;
    CriterionFn fn;
};

const Entry kCriteria[] = {
    {"commutation relations on four geometries", criterion_1},
    {"associativity on seeded triples", criterion_2},
    {"closed product formulas match the recursion", criterion_3},
    {"coefficient-matrix closed forms", criterion_4},
    {"fock algebra identities and completeness", criterion_5},
    {"generator actions agree along two routes", criterion_6},
    {"finite projective transition coherence", criterion_7},
    {"shifted-operator block commutator", criterion_8},
    {"trace quadrature and cyclicity", criterion_9},
    {"radial diagonal normalization", criterion_10},
    {"translated chart basis obstruction", criterion_11},
};

}  // namespace

CheckResult run_criterion(int id, std::uint64_t seed_mix) {
    if (id < 1 || id > 11) throw StructuralError("run_criterion: id out of range");
    const Entry& e = kCriteria[id - 1];
    CheckResult r;
    r.id = id;
    r.name = e.name;
    auto start = std::chrono::steady_clock::now();
    Tally t;
    std::string extra;
    try {
        e.fn(t, extra, seed_mix);
        r.pass = t.failed == 0;
        r.detail = done(t, extra);
    } catch (const std::exception& ex) {
        r.pass = false;
        r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<int> suite_criteria(const std::string& suite) {
    if (suite == "starprod") return {1, 2, 3};
    if (suite == "fock") return {4, 5, 6, 10};
    if (suite == "charts") return {7, 8, 11};
    if (suite == "trace") return {9};
    if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    throw StructuralError("unknown verification suite '" + suite + "'");
}

std::vector<CheckResult> run_criteria(const std::vector<int>& ids, int threads,
                                      std::uint64_t seed_mix) {
    if (threads <= 0) {
        threads = 1;
        if (const char* env = std::getenv("KSTAR_THREADS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && v > 0 && v <= 64) threads = static_cast<int>(v);
        }
    }
    std::vector<CheckResult> out(ids.size());
    if (threads == 1) {
        for (std::size_t i = 0; i < ids.size(); ++i) out[i] = run_criterion(ids[i], seed_mix);
        return out;
    }
    std::size_t next = 0;
    std::mutex mu;
    auto worker = [&] {
        for (;;) {
            std::size_t mine;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= ids.size()) return;
                mine = next++;
            }
            out[mine] = run_criterion(ids[mine], seed_mix);
        }
    };
    std::vector<std::future<void>> pool;
    int spawn = std::min<int>(threads, static_cast<int>(ids.size()));
    for (int i = 0; i < spawn; ++i) pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();
    return out;
}

}  // namespace kstar
