#include "kstar/fock.hpp"

#include <optional>
#include <sstream>

namespace kstar {

void FockMatrix::add(const MultiIndex& m, const MultiIndex& n, const Rational& q) {
    if (m.dim() != dim || n.dim() != dim) throw StructuralError("FockMatrix: dimension mismatch");
    if (!certified_at(m, n)) return;
    if (q.is_zero()) return;
    auto [it, inserted] = a.try_emplace(Key{m, n}, q);
    if (!inserted) {
        it->second += q;
        if (it->second.is_zero()) a.erase(it);
    }
}

Rational FockMatrix::coeff(const MultiIndex& m, const MultiIndex& n) const {
    if (!certified_at(m, n)) throw StructuralError("FockMatrix: entry outside certified block");
    auto it = a.find(Key{m, n});
    return it == a.end() ? Rational(0) : it->second;
}

int FockMatrix::max_row_degree() const {
    int d = 0;
    for (const auto& [key, q] : a) d = std::max(d, key.first.total());
    return d;
}

int FockMatrix::max_col_degree() const {
    int d = 0;
    for (const auto& [key, q] : a) d = std::max(d, key.second.total());
    return d;
}

FockMatrix FockMatrix::scaled(const Rational& q) const {
    FockMatrix r(dim, cz, czb);
    if (q.is_zero()) return r;
    for (const auto& [key, c] : a) r.a.emplace(key, c * q);
    return r;
}

FockMatrix FockMatrix::combined(const FockMatrix& o, bool subtract) const {
    if (o.dim != dim) throw StructuralError("FockMatrix: dimension mismatch");
    FockMatrix r(dim, min_cutoff(cz, o.cz), min_cutoff(czb, o.czb));
    for (const auto& [key, c] : a) r.add(key.first, key.second, c);
    for (const auto& [key, c] : o.a) r.add(key.first, key.second, subtract ? Rational(-c) : c);
    return r;
}

std::string FockMatrix::str() const {
    std::ostringstream os;
    os << "fock[cz=" << (cz == kInfDeg ? -1 : cz) << ",czb=" << (czb == kInfDeg ? -1 : czb)
       << "]{";
    bool first = true;
    for (const auto& [key, c] : a) {
        if (!first) os << ", ";
        first = false;
        os << "(";
        for (int i = 0; i < dim; ++i) os << (i ? "," : "") << key.first[i];
        os << "|";
        for (int i = 0; i < dim; ++i) os << (i ? "," : "") << key.second[i];
        os << "): " << to_pq_string(c);
    }
    os << "}";
    return os.str();
}

bool equal_on_common(const FockMatrix& a, const FockMatrix& b) {
    return (a - b).stored_zero();
}

namespace {

HMatrix restrict_H(const HMatrix& h, int degree) {
    if (degree > h.degree) throw StructuralError("restrict_H: degree exceeds stored matrix");
    HMatrix r;
    r.dim = h.dim;
    r.degree = degree;
    r.hbar = h.hbar;
    for_each_multi_index(h.dim, degree, [&](const MultiIndex& m) {
        r.index_of.emplace(m, static_cast<int>(r.index_set.size()));
        r.index_set.push_back(m);
    });
    r.a.assign(r.index_set.size(), std::vector<Rational>(r.index_set.size()));
    for (std::size_t i = 0; i < r.index_set.size(); ++i)
        for (std::size_t j = 0; j < r.index_set.size(); ++j)
            r.a[i][j] = h.at(r.index_set[i], r.index_set[j]);
    return r;
}

FockContext build_from_kd(KahlerData kd, const Rational& hbar, int block, int pad) {
    if (block < 0) throw StructuralError("FockContext: negative block");
    if (hbar <= 0) throw DomainError("FockContext: hbar must be positive");
    long level = -1;
    if (kd.model == Model::CPn && numerator(hbar) == 1)
        level = static_cast<long>(denominator(hbar));
    int fdeg = block;
    int blk = (level >= 0 && level < block) ? static_cast<int>(level) : block;
    const QSeries& phi = kd.phi.phi;
    int wz = phi.is_entire() ? fdeg + pad : phi.dz();
    int wzb = phi.is_entire() ? fdeg + pad : phi.dzb();
    // one degree past fdeg: the conjugate-gradient table reads shifted rows
    HMatrix H = compute_H(kd.phi, hbar, fdeg + 1);
    HMatrix Hinv = invert_H(restrict_H(H, blk));
    return FockContext{std::move(kd), hbar, level, fdeg, blk, wz, wzb, std::move(H),
                       std::move(Hinv)};
}

}  // namespace

FockContext FockContext::build(Model model, int dim, const Rational& hbar, int block, int pad) {
    return build_from_kd(KahlerData::build(model, dim, block + 1, block + 1, pad), hbar, block,
                         pad);
}

FockContext FockContext::build_custom(const KahlerPotential& p, const Rational& hbar, int block,
                                      int pad) {
    return build_from_kd(KahlerData::build_custom(p, block + 1, block + 1, pad), hbar, block,
                         pad);
}

QSeries gen_function(const FockContext& ctx, Gen g, int i) {
    int n = ctx.dim();
    if (i < 0 || i >= n) throw StructuralError("gen_function: variable index out of range");
    switch (g) {
        case Gen::Z:
            return QSeries::monomial(n, MultiIndex::unit(n, i), MultiIndex(n), Rational(1));
        case Gen::Zbar:
            return QSeries::monomial(n, MultiIndex(n), MultiIndex::unit(n, i), Rational(1));
        case Gen::DPhi:
            return ctx.kd.phi.phi.diff(i, false).scaled(Rational(1) / ctx.hbar);
        case Gen::DPhiBar:
            return ctx.kd.phi.phi.diff(i, true).scaled(Rational(1) / ctx.hbar);
    }
    throw StructuralError("gen_function: unknown generator");
}

FockMatrix vacuum_matrix(const FockContext& ctx) {
    FockMatrix v(ctx.dim(), kInfDeg, kInfDeg);
    v.add(MultiIndex(ctx.dim()), MultiIndex(ctx.dim()), Rational(1));
    return v;
}

FockMatrix identity_matrix(const FockContext& ctx, int d) {
    if (d > ctx.H.degree)
        throw StructuralError("identity_matrix: degree beyond stored coefficient matrix");
    FockMatrix id(ctx.dim(), kInfDeg, kInfDeg);
    for_each_multi_index(ctx.dim(), d, [&](const MultiIndex& n) {
        id.add(n, n, Rational(1) / n.fact());
    });
    return id;
}

FockMatrix to_fock(const FockContext& ctx, const QSeries& P, bool allow_projection) {
    if (P.dim() != ctx.dim()) throw StructuralError("to_fock: dimension mismatch");
    if (!P.is_entire() && P.dzb() < ctx.block)
        throw StructuralError("to_fock: antiholomorphic certification below the block");
    if (!allow_projection && P.max_zbar_degree() > ctx.block)
        throw RepresentationFailureError(
            "to_fock: antiholomorphic degree exceeds the representable block");
    // Columns are completely known only when the coefficients demonstrably
    // stop inside the block; otherwise a tail could feed indices beyond it.
    bool complete = P.is_entire() && P.max_zbar_degree() <= ctx.block;
    FockMatrix A(ctx.dim(), P.dz(), complete ? kInfDeg : ctx.block);
    for (const auto& [key, q] : P.terms()) {
        if (key.second.total() > ctx.block) continue;  // projected away
        for (const auto& n : ctx.Hinv.index_set) {
            const Rational& hv = ctx.Hinv.at(key.second, n);
            if (hv.is_zero()) continue;
            A.add(key.first, n, q * hv / n.fact());
        }
    }
    return A;
}

QSeries from_fock(const FockContext& ctx, const FockMatrix& A) {
    if (A.dim != ctx.dim()) throw StructuralError("from_fock: dimension mismatch");
    if (A.czb != kInfDeg)
        throw StructuralError("from_fock: column support must be completely known");
    if (!A.stored_zero() && A.max_col_degree() > ctx.H.degree)
        throw RepresentationFailureError("from_fock: column degree beyond stored matrix");
    // On the level-limited algebra every coefficient row terminates, so the
    // result is a complete polynomial.
    QSeries P(ctx.dim(), A.cz, ctx.finite_level() ? kInfDeg : ctx.H.degree);
    for (const auto& [key, q] : A.a) {
        Rational w = q * key.second.fact();
        for (const auto& k : ctx.H.index_set) {
            const Rational& hv = ctx.H.at(key.second, k);
            if (hv.is_zero()) continue;
            P.add_term(key.first, k, w * hv);
        }
    }
    return P;
}

FockMatrix fock_mul(const FockContext& ctx, const FockMatrix& A, const FockMatrix& B) {
    if (A.dim != B.dim || A.dim != ctx.dim())
        throw StructuralError("fock_mul: dimension mismatch");
    bool a_complete = A.czb == kInfDeg;
    bool b_complete = B.cz == kInfDeg;
    if (!a_complete && !b_complete)
        throw RepresentationFailureError(
            "fock_mul: neither factor is complete along the contracted index");
    if (a_complete && !b_complete && A.max_col_degree() > B.cz)
        throw RepresentationFailureError(
            "fock_mul: left support reaches rows the right factor does not certify");
    if (b_complete && !a_complete && B.max_row_degree() > A.czb)
        throw RepresentationFailureError(
            "fock_mul: right support reaches columns the left factor does not certify");

    // group the right factor by row
    std::map<MultiIndex, std::vector<std::pair<MultiIndex, Rational>>> rows;
    for (const auto& [key, q] : B.a) rows[key.first].emplace_back(key.second, q);

    FockMatrix C(A.dim, A.cz, B.czb);
    for (const auto& [key, q] : A.a) {
        auto it = rows.find(key.second);
        if (it == rows.end()) continue;
        Rational w = q * key.second.fact();
        for (const auto& [l, qb] : it->second) C.add(key.first, l, w * qb);
    }
    return C;
}

FockMatrix generator_table(const FockContext& ctx, Gen g, int i) {
    if (i < 0 || i >= ctx.dim()) throw StructuralError("generator_table: index out of range");
    if (g != Gen::Zbar && g != Gen::DPhiBar)
        throw StructuralError("generator_table: only the antiholomorphic pair has a table");
    MultiIndex e = MultiIndex::unit(ctx.dim(), i);
    // On the level-limited algebra the table is exact: rows die with the
    // coefficient matrix and columns beyond the block act on nothing.
    bool exact = ctx.finite_level();
    FockMatrix T(ctx.dim(), exact ? kInfDeg : ctx.H.degree, exact ? kInfDeg : ctx.block);
    for (const auto& m : ctx.H.index_set) {
        for (const auto& n : ctx.Hinv.index_set) {
            Rational acc = 0;
            for (const auto& k : ctx.Hinv.index_set) {
                if (g == Gen::Zbar) {
                    if (k.total() + 1 > ctx.block) continue;
                    acc += ctx.H.at(m, k) * ctx.Hinv.at(k + e, n);
                } else {
                    acc += Rational(k[i] + 1) * ctx.H.at(m, k + e) * ctx.Hinv.at(k, n);
                }
            }
            if (!acc.is_zero()) T.add(m, n, acc / n.fact());
        }
    }
    return T;
}

FockMatrix apply_generator(const FockContext& ctx, const FockMatrix& A, Gen g, int i,
                           OperatorSide side) {
    if (i < 0 || i >= ctx.dim()) throw StructuralError("apply_generator: index out of range");
    if (A.dim != ctx.dim()) throw StructuralError("apply_generator: dimension mismatch");
    MultiIndex e = MultiIndex::unit(ctx.dim(), i);
    auto bump = [](int c, int delta) { return c == kInfDeg ? kInfDeg : c + delta; };

    if (g == Gen::Z && side == OperatorSide::Left) {
        FockMatrix C(A.dim, bump(A.cz, 1), A.czb);
        for (const auto& [key, q] : A.a) C.add(key.first + e, key.second, q);
        return C;
    }
    if (g == Gen::Z && side == OperatorSide::Right) {
        FockMatrix C(A.dim, A.cz, bump(A.czb, -1));
        for (const auto& [key, q] : A.a)
            if (key.second[i] > 0) C.add(key.first, key.second - e, q * key.second[i]);
        return C;
    }
    if (g == Gen::DPhi && side == OperatorSide::Left) {
        FockMatrix C(A.dim, bump(A.cz, -1), A.czb);
        for (const auto& [key, q] : A.a)
            if (key.first[i] > 0) C.add(key.first - e, key.second, q * key.first[i]);
        return C;
    }
    if (g == Gen::DPhi && side == OperatorSide::Right) {
        FockMatrix C(A.dim, A.cz, bump(A.czb, 1));
        for (const auto& [key, q] : A.a) C.add(key.first, key.second + e, q);
        return C;
    }
    FockMatrix T = generator_table(ctx, g, i);
    return side == OperatorSide::Left ? fock_mul(ctx, T, A) : fock_mul(ctx, A, T);
}

FockMatrix apply_weighted(const FockContext& ctx, const FockMatrix& A, Gen g, int i,
                          OperatorSide side) {
    // The results hold the block part of the true coordinates; conversions
    // project since weight coefficients can overrun the block.
    QSeries P = from_fock(ctx, A);
    if (g == Gen::Z && side == OperatorSide::Left) {
        QSeries zi = gen_function(ctx, Gen::Z, i);
        return to_fock(ctx, QSeries::mul(zi, P), true);
    }
    if (g == Gen::DPhi && side == OperatorSide::Left) {
        return to_fock(ctx, P.diff(i, false), true);
    }
    if (g == Gen::Zbar && side == OperatorSide::Right) {
        QSeries zbi = gen_function(ctx, Gen::Zbar, i);
        return to_fock(ctx, QSeries::mul(zbi, P), true);
    }
    if (g == Gen::DPhiBar && side == OperatorSide::Right) {
        return to_fock(ctx, P.diff(i, true), true);
    }
    throw StructuralError("apply_weighted: no closed coefficient rule for this combination");
}

FockMatrix apply_function(const FockContext& ctx, const FockMatrix& A, const QSeries& f,
                          OperatorSide side) {
    if (!f.is_entire()) throw StructuralError("apply_function: requires an exact polynomial");
    if (f.dim() != ctx.dim()) throw StructuralError("apply_function: dimension mismatch");
    int n = ctx.dim();
    std::optional<FockMatrix> acc;
    auto accumulate = [&](FockMatrix part) { acc = acc ? *acc + part : std::move(part); };

    // Monomials split as z^m * zbar^k with the holomorphic factor pointwise
    // from the left.  Antiholomorphic factors go through exact routes:
    // from the right they multiply the weight coefficients pointwise, from
    // the left they are the conjugate of a right index shift.
    std::optional<FockMatrix> conj_A;
    for (const auto& [key, q] : f.terms()) {
        FockMatrix cur = A;
        if (side == OperatorSide::Left) {
            if (!key.second.is_zero()) {
                if (!conj_A) conj_A = conjugate_fock(ctx, A);
                cur = *conj_A;
                for (int i = 0; i < n; ++i)
                    for (int r = 0; r < key.second[i]; ++r)
                        cur = apply_generator(ctx, cur, Gen::Z, i, OperatorSide::Right);
                cur = conjugate_fock(ctx, cur);
            }
            for (int i = 0; i < n; ++i)
                for (int r = 0; r < key.first[i]; ++r)
                    cur = apply_generator(ctx, cur, Gen::Z, i, OperatorSide::Left);
        } else {
            for (int i = 0; i < n; ++i)
                for (int r = 0; r < key.first[i]; ++r)
                    cur = apply_generator(ctx, cur, Gen::Z, i, OperatorSide::Right);
            if (!key.second.is_zero()) {
                QSeries mon(ctx.dim(), kInfDeg, kInfDeg);
                mon.add_term(MultiIndex(n), key.second, Rational(1));
                cur = to_fock(ctx, from_fock(ctx, cur) * mon, true);
            }
        }
        accumulate(cur.scaled(q));
    }
    return acc ? *acc : FockMatrix(ctx.dim(), kInfDeg, kInfDeg);
}

FockMatrix apply_word(const FockContext& ctx, FockMatrix start, const std::vector<WordOp>& ops) {
    for (const auto& op : ops) start = apply_generator(ctx, start, op.gen, op.var, op.side);
    return start;
}

FockMatrix conjugate_fock(const FockContext& ctx, const FockMatrix& A) {
    QSeries p = from_fock(ctx, A).conj();
    FockMatrix C(ctx.dim(), kInfDeg, kInfDeg);
    if (!ctx.finite_level()) {
        // Conjugate-then-project is exact only on the block square: the
        // conjugated element can have coordinates past the block whose
        // reflections would pollute rows beyond it.
        C = FockMatrix(ctx.dim(), ctx.block, kInfDeg);
    }
    FockMatrix full = to_fock(ctx, p, true);
    for (const auto& [key, q] : full.a) C.add(key.first, key.second, q);
    return C;
}

QSeries exp_weight(const FockContext& ctx, int sign) {
    if (sign != 1 && sign != -1) throw StructuralError("exp_weight: sign must be +1 or -1");
    QSeries arg = ctx.kd.phi.phi.scaled(Rational(sign) / ctx.hbar);
    return series_exp(arg, ctx.wz, ctx.wzb);
}

QSeries completeness_defect(const FockContext& ctx, int d) {
    QSeries P = from_fock(ctx, identity_matrix(ctx, d));
    QSeries w = exp_weight(ctx, -1);
    QSeries defect = P * w;
    defect.add_term(MultiIndex(ctx.dim()), MultiIndex(ctx.dim()), Rational(-1));
    return defect;
}

}  // namespace kstar
