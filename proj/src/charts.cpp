#include "kstar/charts.hpp"

#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <sstream>

namespace kstar {

namespace {

bool perfect_square(const Integer& n, Integer& root) {
    if (n < 0) return false;
    root = boost::multiprecision::sqrt(n);
    return root * root == n;
}

Rational determinant(std::vector<std::vector<Rational>> m) {
    int n = static_cast<int>(m.size());
    Rational d = 1;
    for (int c = 0; c < n; ++c) {
        int pivot = -1;
        for (int r = c; r < n; ++r)
            if (!m[r][c].is_zero()) {
                pivot = r;
                break;
            }
        if (pivot < 0) return Rational(0);
        if (pivot != c) {
            std::swap(m[pivot], m[c]);
            d = -d;
        }
        d *= m[c][c];
        for (int r = c + 1; r < n; ++r) {
            if (m[r][c].is_zero()) continue;
            Rational f = m[r][c] / m[c][c];
            for (int k = c; k < n; ++k) m[r][k] -= f * m[c][k];
        }
    }
    return d;
}

// Position of a coordinate label in the component ordering of a chart (the
// chart's own label is skipped).
int label_pos(int chart, int label) { return label < chart ? label : label - 1; }

}  // namespace

SqrtRational::SqrtRational(Rational c_, Rational r_) : c(std::move(c_)), r(std::move(r_)) {
    if (r < 0) throw DomainError("SqrtRational: negative radicand");
    if (c.is_zero() || r.is_zero()) {
        c = 0;
        r = 1;
        return;
    }
    Integer sn, sd;
    if (perfect_square(numerator(r), sn) && perfect_square(denominator(r), sd)) {
        c *= Rational(sn) / Rational(sd);
        r = 1;
    }
}

SqrtRational SqrtRational::operator*(const SqrtRational& o) const {
    return SqrtRational(c * o.c, r * o.r);
}

SqrtRational SqrtRational::operator+(const SqrtRational& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    if (r != o.r) throw StructuralError("SqrtRational: mixed radicands in sum");
    return SqrtRational(c + o.c, r);
}

Rational SqrtRational::rational() const {
    if (!is_rational()) throw StructuralError("SqrtRational: radical did not collapse");
    return c;
}

std::string SqrtRational::str() const {
    std::ostringstream os;
    os << to_pq_string(c);
    if (r != 1) os << "*sqrt(" << to_pq_string(r) << ")";
    return os.str();
}

AnalyticTransition identity_transition(int dim) {
    AnalyticTransition t;
    t.phi_hol = QSeries::entire(dim);
    for (int i = 0; i < dim; ++i)
        t.w_of_z.push_back(
            QSeries::monomial(dim, MultiIndex::unit(dim, i), MultiIndex(dim), Rational(1)));
    t.base.assign(static_cast<std::size_t>(dim), Rational(0));
    return t;
}

std::map<MultiIndex, QSeries> transition_coefficients(const AnalyticTransition& t,
                                                      const Rational& hbar, int alpha_max,
                                                      int beta_cut) {
    int n = t.dim();
    if (n <= 0) throw StructuralError("transition: empty coordinate map");
    if (static_cast<int>(t.base.size()) != n)
        throw StructuralError("transition: base point dimension mismatch");
    if (hbar.is_zero()) throw DomainError("transition: hbar must be nonzero");
    if (alpha_max < 0 || beta_cut < 0) throw StructuralError("transition: negative cutoff");
    for (const auto& w : t.w_of_z) {
        if (w.dim() != n) throw StructuralError("transition: component dimension mismatch");
        if (w.max_zbar_degree() > 0)
            throw ChartError("transition: coordinate map must be holomorphic");
    }
    if (t.phi_hol.dim() != n)
        throw StructuralError("transition: potential shift dimension mismatch");
    if (t.phi_hol.max_zbar_degree() > 0)
        throw ChartError("transition: potential shift must be holomorphic");

    MultiIndex origin(n);
    std::vector<std::vector<Rational>> jac(static_cast<std::size_t>(n),
                                           std::vector<Rational>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                t.w_of_z[static_cast<std::size_t>(i)].coeff(MultiIndex::unit(n, j), origin);
    if (determinant(jac).is_zero())
        throw ChartError("transition: Jacobian singular at base point");

    QSeries shift = t.phi_hol.scaled(Rational(-1) / hbar);
    if (!shift.stored_zero() && !shift.coeff(origin, origin).is_zero())
        throw ChartError("transition: potential shift must vanish at the base point");
    QSeries weight = series_exp(shift, beta_cut, 0);

    std::vector<QSeries> w;
    w.reserve(t.w_of_z.size());
    for (const auto& wi : t.w_of_z) w.push_back(wi.truncated(beta_cut, 0));

    std::map<MultiIndex, QSeries> out;
    for_each_multi_index(n, alpha_max, [&](const MultiIndex& alpha) {
        if (alpha.is_zero()) {
            out.emplace(alpha, weight);
            return;
        }
        int s = 0;
        while (alpha[s] == 0) ++s;
        const QSeries& prev = out.at(alpha - MultiIndex::unit(n, s));
        out.emplace(alpha, QSeries::mul(prev, w[static_cast<std::size_t>(s)], beta_cut, 0));
    });
    return out;
}

void TransitionMatrix::add(const Key& src, const Key& dst, const SqrtRational& v) {
    if (v.is_zero()) return;
    auto key = std::make_pair(src, dst);
    auto it = a.find(key);
    if (it == a.end()) {
        a.emplace(std::move(key), v);
        return;
    }
    it->second = it->second + v;
    if (it->second.is_zero()) a.erase(it);
}

SqrtRational TransitionMatrix::coeff(const Key& src, const Key& dst) const {
    auto it = a.find(std::make_pair(src, dst));
    return it == a.end() ? SqrtRational() : it->second;
}

std::string TransitionMatrix::str() const {
    std::ostringstream os;
    os << "transition[src<=(" << bm << "," << bn << "), dst<=(" << (ai == kInfDeg ? -1 : ai)
       << "," << (aj == kInfDeg ? -1 : aj) << ")]{";
    bool first = true;
    auto put = [&](const MultiIndex& m) {
        for (int i = 0; i < dim; ++i) os << (i ? "," : "") << m[i];
    };
    for (const auto& [key, v] : a) {
        if (!first) os << ", ";
        first = false;
        os << "(";
        put(key.first.first);
        os << "|";
        put(key.first.second);
        os << ")->(";
        put(key.second.first);
        os << "|";
        put(key.second.second);
        os << "): " << v.str();
    }
    os << "}";
    return os.str();
}

TransitionMatrix transition_matrix(const AnalyticTransition& t, const FockContext& ctx_z,
                                   const FockContext& ctx_w, int bm, int bn, int beta_cut) {
    int n = t.dim();
    if (ctx_z.dim() != n || ctx_w.dim() != n)
        throw StructuralError("transition matrix: context dimension mismatch");
    if (ctx_z.hbar != ctx_w.hbar)
        throw StructuralError("transition matrix: contexts disagree on hbar");
    for (const auto& b : t.base)
        if (!b.is_zero())
            throw ChartError("transition matrix: expansion must be about the chart origin");
    if (!is_radial(ctx_w.kd.phi.phi))
        throw ChartError(
            "transition matrix: expanded-chart potential must be radial "
            "(its coefficient rows must terminate)");
    if (bm < 0) bm = ctx_w.block;
    if (bn < 0) bn = ctx_w.block;
    if (bn > ctx_w.H.degree)
        throw StructuralError("transition matrix: source block exceeds stored coefficients");
    if (beta_cut < 0) beta_cut = std::max(ctx_z.H.degree, std::max(bm, bn));

    int alpha_max = std::max(bm, bn);
    auto C = transition_coefficients(t, ctx_z.hbar, alpha_max, beta_cut);

    int ai = kInfDeg;
    for (const auto& [alpha, s] : C) ai = min_cutoff(ai, s.dz());
    if (ai < ctx_z.block)
        throw ChartError("transition matrix: expansion not certified through the inverse block");

    // Weighted sums of expansion coefficients against the inverse block.  The
    // mirrored coefficients equal the original ones: everything stored here is
    // a real rational.
    const HMatrix& hw = ctx_w.H;
    const HMatrix& hinv = ctx_z.Hinv;
    MultiIndex origin(n);
    std::map<MultiIndex, std::vector<Rational>> B;
    for_each_multi_index(n, bn, [&](const MultiIndex& row) {
        for (const auto& k : hw.index_set) {
            if (hw.at(row, k).is_zero() || B.count(k)) continue;
            if (k.total() > alpha_max)
                throw ChartError("transition matrix: coefficient row reaches past the expansion");
            const QSeries& ck = C.at(k);
            std::vector<Rational> col(hinv.index_set.size(), Rational(0));
            for (std::size_t j = 0; j < hinv.index_set.size(); ++j) {
                Rational s = 0;
                for (const auto& beta : hinv.index_set) {
                    const Rational& hv = hinv.at(beta, hinv.index_set[j]);
                    if (hv.is_zero()) continue;
                    s += ck.coeff(beta, origin) * hv;
                }
                col[j] = std::move(s);
            }
            B.emplace(k, std::move(col));
        }
    });

    TransitionMatrix T;
    T.dim = n;
    T.bm = bm;
    T.bn = bn;
    T.ai = ai;
    T.aj = ctx_z.block;
    for_each_multi_index(n, bm, [&](const MultiIndex& m) {
        const QSeries& cm = C.at(m);
        for_each_multi_index(n, bn, [&](const MultiIndex& row) {
            std::vector<Rational> S(hinv.index_set.size(), Rational(0));
            bool any = false;
            for (const auto& k : hw.index_set) {
                const Rational& hv = hw.at(row, k);
                if (hv.is_zero()) continue;
                const auto& col = B.at(k);
                for (std::size_t j = 0; j < col.size(); ++j)
                    if (!col[j].is_zero()) {
                        S[j] += hv * col[j];
                        any = true;
                    }
            }
            if (!any) return;
            for (const auto& [key, ci] : cm.terms()) {
                const MultiIndex& i = key.first;
                for (std::size_t j = 0; j < S.size(); ++j) {
                    if (S[j].is_zero()) continue;
                    const MultiIndex& jj = hinv.index_set[j];
                    Rational rad = row.fact() * i.fact() / (m.fact() * jj.fact());
                    T.add({m, row}, {i, jj}, SqrtRational(ci * S[j], rad));
                }
            }
        });
    });
    return T;
}

FockMatrix apply_transition(const TransitionMatrix& T, const FockMatrix& A) {
    if (A.dim != T.dim) throw StructuralError("apply_transition: dimension mismatch");
    if (A.cz < T.bm || A.czb < T.bn)
        throw RepresentationFailureError(
            "apply_transition: operand not certified through the source block");
    if (A.max_row_degree() > T.bm || A.max_col_degree() > T.bn)
        throw RepresentationFailureError(
            "apply_transition: operand support exceeds the source block");
    FockMatrix out(T.dim, T.ai, T.aj);
    MultiIndex origin(T.dim);
    for (const auto& [key, c] : A.a) {
        auto it = T.a.lower_bound(std::make_pair(key, TransitionMatrix::Key{origin, origin}));
        for (; it != T.a.end() && it->first.first == key; ++it) {
            const MultiIndex& i = it->first.second.first;
            const MultiIndex& j = it->first.second.second;
            // unnormalized-basis conversion; the radical always cancels here
            SqrtRational conv(Rational(1),
                              key.first.fact() * key.second.fact() / (i.fact() * j.fact()));
            out.add(i, j, c * (it->second * conv).rational());
        }
    }
    return out;
}

TransitionMatrix compose_transitions(const TransitionMatrix& second,
                                     const TransitionMatrix& first) {
    if (second.dim != first.dim)
        throw StructuralError("compose_transitions: dimension mismatch");
    int mi = 0, mj = 0;
    for (const auto& [key, v] : first.a) {
        mi = std::max(mi, key.second.first.total());
        mj = std::max(mj, key.second.second.total());
    }
    if (mi > second.bm || mj > second.bn)
        throw RepresentationFailureError(
            "compose_transitions: middle block not certified by the second transition");
    TransitionMatrix out;
    out.dim = first.dim;
    out.bm = first.bm;
    out.bn = first.bn;
    out.ai = second.ai;
    out.aj = second.aj;
    MultiIndex origin(first.dim);
    for (const auto& [key, v] : first.a) {
        auto it = second.a.lower_bound(
            std::make_pair(key.second, TransitionMatrix::Key{origin, origin}));
        for (; it != second.a.end() && it->first.first == key.second; ++it)
            out.add(key.first, it->first.second, v * it->second);
    }
    return out;
}

bool transition_is_identity(const TransitionMatrix& T) {
    if (T.bm >= kInfDeg || T.bn >= kInfDeg)
        throw StructuralError("transition_is_identity: unbounded source block");
    for (const auto& [key, v] : T.a) {
        if (key.first != key.second) return false;
        if (!(v == SqrtRational(Rational(1), Rational(1)))) return false;
    }
    bool complete = true;
    for_each_multi_index(T.dim, T.bm, [&](const MultiIndex& m) {
        for_each_multi_index(T.dim, T.bn, [&](const MultiIndex& n) {
            if (!T.a.count(std::make_pair(TransitionMatrix::Key{m, n},
                                          TransitionMatrix::Key{m, n})))
                complete = false;
        });
    });
    return complete;
}

FiniteTransition cpn_transition_finite(int a, int b, long L, const MultiIndex& m,
                                       const MultiIndex& n) {
    int N = m.dim();
    if (n.dim() != N) throw StructuralError("cpn_transition_finite: index dimension mismatch");
    if (N < 1) throw StructuralError("cpn_transition_finite: empty index");
    if (L < 0) throw DomainError("cpn_transition_finite: negative level");
    if (a == b || a < 0 || b < 0 || a > N || b > N)
        throw StructuralError("cpn_transition_finite: invalid chart labels");
    if (m.total() > L || n.total() > L)
        throw ChartError("cpn_transition_finite: index outside the finite block");

    auto move_index = [&](const MultiIndex& idx) {
        MultiIndex out(N);
        for (int l = 0; l <= N; ++l) {
            if (l == a || l == b) continue;
            out.at(label_pos(b, l)) = idx[label_pos(a, l)];
        }
        out.at(label_pos(b, a)) = static_cast<int>(L) - idx.total();
        return out;
    };
    int nb = n[label_pos(a, b)];
    Rational factor = factorial(L - n.total()) / factorial(nb);
    return FiniteTransition{move_index(m), move_index(n), std::move(factor)};
}

FockMatrix cpn_transition_apply(const FockMatrix& A, int a, int b, long L) {
    if (A.cz < L || A.czb < L)
        throw RepresentationFailureError(
            "cpn_transition_apply: operand not certified through the finite block");
    FockMatrix out(A.dim, kInfDeg, kInfDeg);
    for (const auto& [key, c] : A.a) {
        FiniteTransition ft = cpn_transition_finite(a, b, L, key.first, key.second);
        out.add(ft.m, ft.n, c / ft.factor);
    }
    return out;
}

TransitionMatrix cpn_finite_transition_matrix(int a, int b, long L, int dim) {
    if (L < 0) throw DomainError("cpn_finite_transition_matrix: negative level");
    TransitionMatrix T;
    T.dim = dim;
    T.bm = T.bn = T.ai = T.aj = static_cast<int>(L);
    for_each_multi_index(dim, static_cast<int>(L), [&](const MultiIndex& m) {
        for_each_multi_index(dim, static_cast<int>(L), [&](const MultiIndex& n) {
            FiniteTransition ft = cpn_transition_finite(a, b, L, m, n);
            int mb = m[label_pos(a, b)];
            int nb = n[label_pos(a, b)];
            Rational rad = factorial(nb) * factorial(L - m.total()) /
                           (factorial(mb) * factorial(L - n.total()));
            T.add({m, n}, {ft.m, ft.n}, SqrtRational(Rational(1), std::move(rad)));
        });
    });
    return T;
}

FockMatrix f_l_project(const FockMatrix& A, long L) {
    if (L < 0) throw DomainError("f_l_project: negative level");
    // Once the certified block covers the finite block, the projected element
    // is known in full.
    int cz = A.cz >= L ? kInfDeg : A.cz;
    int czb = A.czb >= L ? kInfDeg : A.czb;
    FockMatrix out(A.dim, cz, czb);
    for (const auto& [key, c] : A.a)
        if (key.first.total() <= L && key.second.total() <= L) out.add(key.first, key.second, c);
    return out;
}

std::pair<FockMatrix, FockMatrix> shifted_operators(const FockContext& ctx, int i) {
    if (!ctx.finite_level())
        throw DomainError("shifted_operators: context must carry the finite block algebra");
    if (i < 0 || i >= ctx.dim()) throw StructuralError("shifted_operators: slot out of range");
    FockMatrix cre(ctx.dim(), kInfDeg, kInfDeg);
    FockMatrix ann(ctx.dim(), kInfDeg, kInfDeg);
    for_each_multi_index(ctx.dim(), static_cast<int>(ctx.level) - 1, [&](const MultiIndex& n) {
        Rational c = Rational(1) / n.fact();
        MultiIndex up = n + MultiIndex::unit(ctx.dim(), i);
        cre.add(up, n, c);
        ann.add(n, up, c);
    });
    return {std::move(cre), std::move(ann)};
}

FockMatrix shifted_commutator_closed(const FockContext& ctx, int i, int j) {
    if (!ctx.finite_level())
        throw DomainError("shifted_commutator_closed: context must carry the finite block algebra");
    if (i < 0 || i >= ctx.dim() || j < 0 || j >= ctx.dim())
        throw StructuralError("shifted_commutator_closed: slot out of range");
    FockMatrix out(ctx.dim(), kInfDeg, kInfDeg);
    long L = ctx.level;
    for_each_multi_index(ctx.dim(), static_cast<int>(L), [&](const MultiIndex& n) {
        if (i == j) {
            Rational c = 1;
            if (n.total() == L) c -= Rational(n[i] + 1);
            out.add(n, n, c / n.fact());
        } else if (n.total() == L && n[j] >= 1) {
            // off the diagonal the unrestricted shifts commute; the block
            // restriction leaves only this rim defect
            MultiIndex col = n + MultiIndex::unit(ctx.dim(), i) - MultiIndex::unit(ctx.dim(), j);
            out.add(n, col, Rational(-n[j]) / n.fact());
        }
    });
    return out;
}

QSeries cylinder_shift_residual(const Rational& hbar, const Rational& shift, int cut) {
    if (hbar <= 0) throw DomainError("cylinder residual: hbar must be positive");
    if (shift.is_zero()) throw DomainError("cylinder residual: shift must be nonzero");
    if (cut < 2) throw StructuralError("cylinder residual: cutoff too small");
    MultiIndex e = MultiIndex::unit(1, 0);
    MultiIndex o(1);

    // (z + s)(zbar + s)
    QSeries poly = QSeries::entire(1);
    poly.add_term(e, e, Rational(1));
    poly.add_term(e, o, shift);
    poly.add_term(o, e, shift);
    poly.add_term(o, o, shift * shift);

    // weight of the shifted point relative to the original, up to the
    // constant e^{-s^2/hbar} that the rescaling absorbs
    QSeries lin(1, kInfDeg, kInfDeg);
    Rational scale = -shift / hbar;
    lin.add_term(e, o, scale);
    lin.add_term(o, e, scale);
    QSeries relw = series_exp(lin, cut, cut);

    QSeries f = QSeries::mul(poly, relw, cut, cut);
    QSeries original = QSeries::monomial(1, e, e, Rational(1));
    return f + original.scaled(-f.coeff(e, e));
}

}  // namespace kstar
