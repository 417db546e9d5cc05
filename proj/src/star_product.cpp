#include "kstar/star_product.hpp"

#include <utility>

namespace kstar {

FormalSeries FormalSeries::from_series(const QSeries& f, int order) {
    if (order < 0) throw StructuralError("FormalSeries: negative order");
    FormalSeries r;
    r.dim = f.dim();
    r.c.assign(static_cast<std::size_t>(order) + 1, QSeries::entire(f.dim()));
    r.c[0] = f;
    return r;
}

static void require_same_shape(const FormalSeries& a, const FormalSeries& b) {
    if (a.dim != b.dim) throw StructuralError("FormalSeries: dimension mismatch");
    if (a.order() != b.order()) throw StructuralError("FormalSeries: order mismatch");
}

FormalSeries FormalSeries::operator+(const FormalSeries& o) const {
    require_same_shape(*this, o);
    FormalSeries r = *this;
    for (int t = 0; t <= order(); ++t) r.c[static_cast<std::size_t>(t)] += o.at(t);
    return r;
}

FormalSeries FormalSeries::operator-(const FormalSeries& o) const {
    require_same_shape(*this, o);
    FormalSeries r = *this;
    for (int t = 0; t <= order(); ++t) r.c[static_cast<std::size_t>(t)] -= o.at(t);
    return r;
}

bool FormalSeries::stored_zero() const {
    for (const auto& s : c)
        if (!s.stored_zero()) return false;
    return true;
}

FormalSeries FormalSeries::conj() const {
    FormalSeries r = *this;
    for (auto& s : r.c) s = s.conj();
    return r;
}

TruncatedSeries<HbarPoly> FormalSeries::collapse() const {
    int dz = kInfDeg, dzb = kInfDeg;
    for (const auto& s : c) {
        dz = min_cutoff(dz, s.dz());
        dzb = min_cutoff(dzb, s.dzb());
    }
    TruncatedSeries<HbarPoly> r(dim, dz, dzb);
    for (int t = 0; t <= order(); ++t)
        for (const auto& [key, q] : at(t).terms())
            r.add_term(key.first, key.second, HbarPoly::monomial(order(), t, q));
    return r;
}

QSeries FormalSeries::evaluate(const Rational& hbar) const {
    QSeries r = at(0);
    Rational pw = 1;
    for (int t = 1; t <= order(); ++t) {
        pw *= hbar;
        r += at(t).scaled(pw);
    }
    return r;
}

bool equal_on_common(const FormalSeries& a, const FormalSeries& b) {
    require_same_shape(a, b);
    for (int t = 0; t <= a.order(); ++t)
        if (!equal_on_common(a.at(t), b.at(t))) return false;
    return true;
}

StarContext::StarContext(const KahlerData& kd, int order) : kd_(kd), order_(order) {
    if (order < 0) throw StructuralError("StarContext: negative order");
    capz_ = kd.phi.phi.dz();
    capzb_ = kd.phi.phi.dzb();
    int n = kd.dim;
    lambda_.assign(static_cast<std::size_t>(n), {});
    // lambda[i][l][m] = sum_j (d_{zbar^l} g^{ibar j}) g_{j mbar}, the
    // structure coefficient of [d_{zbar^l}, D^{ibar}] = lambda D^{mbar}.
    for (int i = 0; i < n; ++i) {
        lambda_[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(n), {});
        for (int l = 0; l < n; ++l) {
            auto& row = lambda_[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
            for (int m = 0; m < n; ++m) {
                QSeries acc = QSeries::zero(n, capz_, capzb_);
                for (int j = 0; j < n; ++j) {
                    QSeries d = kd.ginv.at(i, j).diff(l, true);
                    acc += QSeries::mul(d, kd.g.at(j, m), capz_, capzb_);
                }
                row.push_back(std::move(acc));
            }
        }
    }
}

QSeries StarContext::dbar_apply(int i, const QSeries& u) const {
    QSeries acc = QSeries::zero(kd_.dim, capz_, capzb_);
    bool any = false;
    for (int j = 0; j < kd_.dim; ++j) {
        QSeries du = u.diff(j, false);
        if (du.stored_zero() && du.is_entire()) continue;
        acc += QSeries::mul(kd_.ginv.at(i, j), du, capz_, capzb_);
        any = true;
    }
    if (!any) return QSeries::entire(kd_.dim);  // derivative of a constant-like term
    return acc;
}

// Drop map entries whose series is stored-zero at the maximal certification
// we could ever claim; narrower zeros are kept because they still carry
// cutoff information.
static void prune_terms(std::map<MultiIndex, QSeries>& m, int capz, int capzb) {
    for (auto it = m.begin(); it != m.end();) {
        if (it->second.stored_zero() && it->second.dz() >= capz && it->second.dzb() >= capzb)
            it = m.erase(it);
        else
            ++it;
    }
}

const std::map<MultiIndex, QSeries>& StarContext::comm_dbar_word(int l, const MultiIndex& I) {
    auto key = std::make_pair(l, I);
    auto hit = comm_cache_.find(key);
    if (hit != comm_cache_.end()) return hit->second;

    std::map<MultiIndex, QSeries> result;
    int n = kd_.dim;
    auto add = [&](const MultiIndex& J, const QSeries& u) {
        auto [it, inserted] = result.try_emplace(J, u);
        if (!inserted) it->second += u;
    };

    int i = -1;
    for (int t = 0; t < n; ++t)
        if (I[t] > 0) {
            i = t;
            break;
        }
    if (i < 0) throw InternalError("comm_dbar_word: empty word");

    const auto& lam = lambda_[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
    if (I.total() == 1) {
        for (int m = 0; m < n; ++m) add(MultiIndex::unit(n, m), lam[static_cast<std::size_t>(m)]);
    } else {
        MultiIndex rest = I - MultiIndex::unit(n, i);
        // [d, D^i D^rest] = [d, D^i] D^rest + D^i [d, D^rest]
        for (int m = 0; m < n; ++m)
            add(rest + MultiIndex::unit(n, m), lam[static_cast<std::size_t>(m)]);
        for (const auto& [J, u] : comm_dbar_word(l, rest)) {
            add(J, dbar_apply(i, u));
            add(J + MultiIndex::unit(n, i), u);
        }
    }
    prune_terms(result, capz_, capzb_);
    return comm_cache_.emplace(std::move(key), std::move(result)).first->second;
}

DiffOperator build_left_operator(const QSeries& f, StarContext& ctx) {
    const KahlerData& kd = ctx.kd();
    if (f.dim() != kd.dim) throw StructuralError("build_left_operator: dimension mismatch");
    int n = kd.dim;
    DiffOperator op;
    op.dim = n;
    op.side = OperatorSide::Left;
    op.levels.resize(static_cast<std::size_t>(ctx.order()) + 1);
    op.levels[0].emplace(MultiIndex(n), f);

    for (int ord = 1; ord <= ctx.order(); ++ord) {
        const auto& prev = op.levels[static_cast<std::size_t>(ord) - 1];
        auto& cur = op.levels[static_cast<std::size_t>(ord)];
        for (int l = 0; l < n; ++l) {
            // r_l = [d_{zbar^l}, A^(ord-1)] expanded over the derivation basis
            std::map<MultiIndex, QSeries> r;
            auto add = [&](const MultiIndex& J, const QSeries& u) {
                auto [it, inserted] = r.try_emplace(J, u);
                if (!inserted) it->second += u;
            };
            for (const auto& [I, c] : prev) {
                add(I, c.diff(l, true));
                if (I.total() >= 1)
                    for (const auto& [J, u] : ctx.comm_dbar_word(l, I))
                        add(J, QSeries::mul(c, u, ctx.capz(), ctx.capzb()));
            }
            // match against [A^(ord), d_{zbar^l} phi] = sum_I I_l c_I D^{I - e_l}
            for (const auto& [J, rc] : r) {
                MultiIndex I = J + MultiIndex::unit(n, l);
                QSeries cand = rc.scaled(Rational(1, J[l] + 1));
                auto it = cur.find(I);
                if (it == cur.end()) {
                    cur.emplace(I, std::move(cand));
                } else if (!equal_on_common(it->second, cand)) {
                    throw InternalError("left operator ladder: inconsistent coefficient");
                }
            }
        }
        prune_terms(cur, ctx.capz(), ctx.capzb());
    }
    return op;
}

DiffOperator build_right_operator(const QSeries& f, StarContext& ctx) {
    DiffOperator op = build_left_operator(f.conj(), ctx);
    op.side = OperatorSide::Right;
    for (auto& level : op.levels)
        for (auto& [I, c] : level) c = c.conj();
    return op;
}

static FormalSeries apply_left(const DiffOperator& op, const FormalSeries& g, StarContext& ctx) {
    int n = op.dim;
    FormalSeries res;
    res.dim = n;
    res.c.assign(static_cast<std::size_t>(g.order()) + 1, QSeries::entire(n));

    // derivation words applied to each grade of g, memoized bottom-up
    std::map<std::pair<int, MultiIndex>, QSeries> dg;
    std::function<const QSeries&(int, const MultiIndex&)> word =
        [&](int b, const MultiIndex& I) -> const QSeries& {
        auto key = std::make_pair(b, I);
        auto hit = dg.find(key);
        if (hit != dg.end()) return hit->second;
        QSeries v = QSeries::entire(n);
        if (I.is_zero()) {
            v = g.at(b);
        } else {
            int i = 0;
            while (I[i] == 0) ++i;
            v = ctx.dbar_apply(i, word(b, I - MultiIndex::unit(n, i)));
        }
        return dg.emplace(std::move(key), std::move(v)).first->second;
    };

    for (int ord = 0; ord <= op.order(); ++ord) {
        const auto& level = op.levels[static_cast<std::size_t>(ord)];
        if (level.empty()) continue;
        for (int b = 0; ord + b <= g.order(); ++b) {
            const QSeries& gb = g.at(b);
            if (gb.stored_zero() && gb.is_entire()) continue;  // exactly zero grade
            QSeries acc = QSeries::entire(n);
            for (const auto& [I, c] : level)
                acc += QSeries::mul(c, word(b, I), ctx.capz(), ctx.capzb());
            res.c[static_cast<std::size_t>(ord + b)] += acc;
        }
    }
    return res;
}

FormalSeries apply_operator(const DiffOperator& op, const FormalSeries& g, StarContext& ctx) {
    if (g.dim != op.dim) throw StructuralError("apply_operator: dimension mismatch");
    if (op.side == OperatorSide::Left) return apply_left(op, g, ctx);
    DiffOperator mirrored;
    mirrored.dim = op.dim;
    mirrored.side = OperatorSide::Left;
    mirrored.levels = op.levels;
    for (auto& level : mirrored.levels)
        for (auto& [I, c] : level) c = c.conj();
    return apply_left(mirrored, g.conj(), ctx).conj();
}

FormalSeries star_formal(const FormalSeries& f, const FormalSeries& g, StarContext& ctx) {
    require_same_shape(f, g);
    if (f.order() != ctx.order()) throw StructuralError("star_formal: order mismatch with context");
    FormalSeries res;
    res.dim = f.dim;
    res.c.assign(static_cast<std::size_t>(f.order()) + 1, QSeries::entire(f.dim));
    for (int a = 0; a <= f.order(); ++a) {
        const QSeries& fa = f.at(a);
        if (fa.stored_zero() && fa.is_entire()) continue;
        DiffOperator op = build_left_operator(fa, ctx);
        FormalSeries part = apply_left(op, g, ctx);
        for (int s = 0; a + s <= f.order(); ++s)
            res.c[static_cast<std::size_t>(a + s)] += part.at(s);
    }
    return res;
}

FormalSeries star_formal(const QSeries& f, const QSeries& g, StarContext& ctx) {
    return star_formal(FormalSeries::from_series(f, ctx.order()),
                       FormalSeries::from_series(g, ctx.order()), ctx);
}

FormalSeries star_closed_cn(const QSeries& f, const QSeries& g, int order) {
    f.require_same_dim(g);
    if (!f.is_entire() || !g.is_entire())
        throw StructuralError("star_closed_cn: requires exact polynomial inputs");
    int n = f.dim();
    FormalSeries res;
    res.dim = n;
    res.c.assign(static_cast<std::size_t>(order) + 1, QSeries::entire(n));
    int maxlevel = std::min({order, f.max_zbar_degree(), g.max_z_degree()});
    for_each_multi_index(n, maxlevel, [&](const MultiIndex& beta) {
        int t = beta.total();
        if (t > order) return;
        QSeries df = f;
        QSeries dg = g;
        for (int i = 0; i < n; ++i)
            for (int rep = 0; rep < beta[i]; ++rep) {
                df = df.diff(i, true);
                dg = dg.diff(i, false);
            }
        res.c[static_cast<std::size_t>(t)] += (df * dg).scaled(Rational(1) / beta.fact());
    });
    return res;
}

HbarPoly fubini_c_formal(Model model, int n, int order) {
    if (model != Model::CPn && model != Model::CHn)
        throw StructuralError("fubini coefficient: model must be projective or hyperbolic");
    if (n > order) return HbarPoly(order);
    HbarPoly p = HbarPoly::monomial(order, n, Rational(1) / factorial(n));
    for (int j = 1; j < n; ++j)
        p = p * geometric_inverse(order, model == Model::CPn ? Rational(j) : Rational(-j));
    return p;
}

Rational fubini_c_numeric(Model model, int n, const Rational& hbar) {
    if (model != Model::CPn && model != Model::CHn)
        throw StructuralError("fubini coefficient: model must be projective or hyperbolic");
    Rational num = 1;
    for (int t = 0; t < n; ++t) num *= hbar;
    Rational den = factorial(n);
    for (int j = 1; j < n; ++j) {
        Rational factor = model == Model::CPn ? Rational(1) - Rational(j) * hbar
                                              : Rational(1) + Rational(j) * hbar;
        if (factor.is_zero())
            throw PoleError("fubini coefficient: pole at order " + std::to_string(n) +
                            " for this value of the parameter");
        den *= factor;
    }
    return num / den;
}

// Antiholomorphic derivation acting on the first factor:
// D^j u = sum_k conj(g^{jbar k}) d_{zbar^k} u.
static QSeries dup_derivation(const KahlerData& kd, int j, const QSeries& u, int capz, int capzb) {
    QSeries acc = QSeries::zero(kd.dim, capz, capzb);
    bool any = false;
    for (int k = 0; k < kd.dim; ++k) {
        QSeries du = u.diff(k, true);
        if (du.stored_zero() && du.is_entire()) continue;
        acc += QSeries::mul(kd.ginv.at(j, k).conj(), du, capz, capzb);
        any = true;
    }
    if (!any) return QSeries::entire(kd.dim);
    return acc;
}

static QSeries dbar_derivation(const KahlerData& kd, int i, const QSeries& u, int capz, int capzb) {
    QSeries acc = QSeries::zero(kd.dim, capz, capzb);
    bool any = false;
    for (int j = 0; j < kd.dim; ++j) {
        QSeries du = u.diff(j, false);
        if (du.stored_zero() && du.is_entire()) continue;
        acc += QSeries::mul(kd.ginv.at(i, j), du, capz, capzb);
        any = true;
    }
    if (!any) return QSeries::entire(kd.dim);
    return acc;
}

namespace {
struct BidiffTriple {
    QSeries w, fpart, gpart;
};
}  // namespace

// Shared level walk for the covariant closed form: term_n =
// sum g_{j1 k1bar}...g_{jn knbar} (D^{j1}..D^{jn} f)(D^{k1bar}..D^{knbar} g)
// over ordered index tuples.
static std::vector<QSeries> fubini_terms(const QSeries& f, const QSeries& g, const KahlerData& kd,
                                         int n_max) {
    int n = kd.dim;
    int capz = kd.phi.phi.dz();
    int capzb = kd.phi.phi.dzb();
    std::vector<QSeries> terms;
    std::vector<BidiffTriple> level;
    level.push_back({constant_series(n, Rational(1)), f, g});
    for (int lev = 0; lev <= n_max; ++lev) {
        QSeries sum = QSeries::entire(n);
        for (const auto& t : level)
            sum += QSeries::mul(t.w, QSeries::mul(t.fpart, t.gpart, capz, capzb), capz, capzb);
        terms.push_back(std::move(sum));
        if (lev == n_max) break;
        std::vector<BidiffTriple> next;
        next.reserve(level.size() * static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
        for (const auto& t : level)
            for (int j = 0; j < n; ++j) {
                QSeries fj = dup_derivation(kd, j, t.fpart, capz, capzb);
                for (int k = 0; k < n; ++k)
                    next.push_back({QSeries::mul(t.w, kd.g.at(j, k), capz, capzb), fj,
                                    dbar_derivation(kd, k, t.gpart, capz, capzb)});
            }
        level = std::move(next);
    }
    return terms;
}

FormalSeries star_closed_fubini(Model model, const QSeries& f, const QSeries& g,
                                const KahlerData& kd, int order) {
    auto terms = fubini_terms(f, g, kd, order);
    FormalSeries res;
    res.dim = kd.dim;
    res.c.assign(static_cast<std::size_t>(order) + 1, QSeries::entire(kd.dim));
    for (int lev = 0; lev <= order; ++lev) {
        HbarPoly cn = fubini_c_formal(model, lev, order);
        for (int t = 0; t <= order; ++t) {
            const Rational& q = cn.coeff(t);
            // an exactly-zero coefficient contributes exactly zero, whatever
            // the term's uncertified tail looks like
            if (q.is_zero()) continue;
            res.c[static_cast<std::size_t>(t)] += terms[static_cast<std::size_t>(lev)].scaled(q);
        }
    }
    return res;
}

QSeries star_closed_fubini_numeric(Model model, const QSeries& f, const QSeries& g,
                                   const KahlerData& kd, const Rational& hbar, int n_max) {
    auto terms = fubini_terms(f, g, kd, n_max);
    QSeries res = QSeries::entire(kd.dim);
    for (int lev = 0; lev <= n_max; ++lev)
        res += terms[static_cast<std::size_t>(lev)].scaled(fubini_c_numeric(model, lev, hbar));
    return res;
}

}  // namespace kstar
