#pragma once

#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

#include "kstar/errors.hpp"
#include "kstar/hbar_poly.hpp"
#include "kstar/multi_index.hpp"
#include "kstar/rational.hpp"

namespace kstar {

// Sentinel cutoff for series that are exact polynomials: every coefficient
// outside the stored support is genuinely zero, not merely unknown.
inline constexpr int kInfDeg = std::numeric_limits<int>::max() / 4;

inline int min_cutoff(int a, int b) { return a < b ? a : b; }

// Power series in z^1..z^N, zbar^1..zbar^N truncated in total holomorphic
// degree (dz) and antiholomorphic degree (dzb).  Coefficients with
// |m| <= dz and |k| <= dzb are certified; outside that region the series
// carries no information.  Binary operations intersect certifications, and
// differentiation lowers the affected cutoff by one.  A cutoff of kInfDeg
// means "certified everywhere" (exact polynomial).
template <typename R>
class TruncatedSeries {
public:
    using Key = std::pair<MultiIndex, MultiIndex>;
    using TermMap = std::map<Key, R>;

    TruncatedSeries(int dim, int dz, int dzb) : n_(dim), dz_(dz), dzb_(dzb) {
        if (dim < 0) throw StructuralError("series: negative dimension");
        if (dz < 0 || dzb < 0) throw StructuralError("series: negative cutoff");
    }

    static TruncatedSeries zero(int dim, int dz, int dzb) { return TruncatedSeries(dim, dz, dzb); }

    static TruncatedSeries entire(int dim) { return TruncatedSeries(dim, kInfDeg, kInfDeg); }

    static TruncatedSeries monomial(int dim, const MultiIndex& m, const MultiIndex& k, R c,
                                    int dz = kInfDeg, int dzb = kInfDeg) {
        TruncatedSeries s(dim, dz, dzb);
        s.add_term(m, k, std::move(c));
        return s;
    }

    int dim() const { return n_; }
    int dz() const { return dz_; }
    int dzb() const { return dzb_; }
    bool is_entire() const { return dz_ == kInfDeg && dzb_ == kInfDeg; }

    const TermMap& terms() const { return terms_; }
    bool stored_zero() const { return terms_.empty(); }

    bool certified_at(const MultiIndex& m, const MultiIndex& k) const {
        return m.total() <= dz_ && k.total() <= dzb_;
    }

    // Zero result means "zero if certified"; querying outside the certified
    // region is a structural misuse.
    R coeff(const MultiIndex& m, const MultiIndex& k) const {
        if (!certified_at(m, k)) throw StructuralError("series: coefficient outside certified region");
        auto it = terms_.find(Key{m, k});
        if (it == terms_.end()) return zero_like();
        return it->second;
    }

    void add_term(const MultiIndex& m, const MultiIndex& k, R c) {
        if (m.dim() != n_ || k.dim() != n_) throw StructuralError("series: term dimension mismatch");
        if (!certified_at(m, k)) return;  // unknown region: nothing to record
        if (kstar::is_zero(c)) return;
        auto [it, inserted] = terms_.try_emplace(Key{m, k}, std::move(c));
        if (!inserted) {
            it->second += c;
            if (kstar::is_zero(it->second)) terms_.erase(it);
        }
    }

    TruncatedSeries& operator+=(const TruncatedSeries& o) {
        *this = *this + o;
        return *this;
    }
    TruncatedSeries& operator-=(const TruncatedSeries& o) {
        *this = *this - o;
        return *this;
    }

    TruncatedSeries operator+(const TruncatedSeries& o) const { return combine(o, false); }
    TruncatedSeries operator-(const TruncatedSeries& o) const { return combine(o, true); }

    TruncatedSeries operator-() const {
        TruncatedSeries r = *this;
        for (auto& [key, c] : r.terms_) c = -c;
        return r;
    }

    TruncatedSeries operator*(const TruncatedSeries& o) const { return mul(*this, o); }

    // Product with an extra stored-degree cap; capping is sound because
    // exponents only ever add.
    static TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b,
                               int capz = kInfDeg, int capzb = kInfDeg) {
        a.require_same_dim(b);
        int rz = min_cutoff(min_cutoff(a.dz_, b.dz_), capz);
        int rzb = min_cutoff(min_cutoff(a.dzb_, b.dzb_), capzb);
        TruncatedSeries r(a.n_, rz, rzb);
        if (a.terms_.empty() || b.terms_.empty()) return r;
        for (const auto& [ka, ca] : a.terms_) {
            if (ka.first.total() > rz || ka.second.total() > rzb) continue;
            for (const auto& [kb, cb] : b.terms_) {
                int mz = ka.first.total() + kb.first.total();
                int mzb = ka.second.total() + kb.second.total();
                if (mz > rz || mzb > rzb) continue;
                r.add_term(ka.first + kb.first, ka.second + kb.second, ca * cb);
            }
        }
        return r;
    }

    TruncatedSeries scaled(const Rational& q) const {
        TruncatedSeries r(n_, dz_, dzb_);
        if (q.is_zero()) return r;
        for (const auto& [key, c] : terms_) {
            R v = c;
            ring_scale(v, q);
            r.terms_.emplace(key, std::move(v));
        }
        return r;
    }

    TruncatedSeries scaled_ring(const R& s) const {
        TruncatedSeries r(n_, dz_, dzb_);
        if (kstar::is_zero(s)) return r;
        for (const auto& [key, c] : terms_) {
            R v = c * s;
            if (!kstar::is_zero(v)) r.terms_.emplace(key, std::move(v));
        }
        return r;
    }

    // d/dz^i (bar = false) or d/dzbar^i (bar = true).
    TruncatedSeries diff(int i, bool bar) const {
        if (i < 0 || i >= n_) throw StructuralError("series: variable index out of range");
        int rz = (bar || dz_ == kInfDeg) ? dz_ : dz_ - 1;
        int rzb = (!bar || dzb_ == kInfDeg) ? dzb_ : dzb_ - 1;
        if (rz < 0 || rzb < 0) throw StructuralError("series: differentiating exhausted cutoff");
        TruncatedSeries r(n_, rz, rzb);
        for (const auto& [key, c] : terms_) {
            const MultiIndex& e = bar ? key.second : key.first;
            if (e[i] == 0) continue;
            MultiIndex shifted = e - MultiIndex::unit(n_, i);
            R v = c;
            ring_scale(v, Rational(e[i]));
            if (bar)
                r.add_term(key.first, shifted, std::move(v));
            else
                r.add_term(shifted, key.second, std::move(v));
        }
        return r;
    }

    // Complex conjugation for real coefficient rings: swaps the holomorphic
    // and antiholomorphic exponents (and the cutoffs with them).
    TruncatedSeries conj() const {
        TruncatedSeries r(n_, dzb_, dz_);
        for (const auto& [key, c] : terms_) r.terms_.emplace(Key{key.second, key.first}, c);
        return r;
    }

    TruncatedSeries truncated(int dz, int dzb) const {
        int rz = min_cutoff(dz_, dz);
        int rzb = min_cutoff(dzb_, dzb);
        TruncatedSeries r(n_, rz, rzb);
        for (const auto& [key, c] : terms_)
            if (key.first.total() <= rz && key.second.total() <= rzb) r.terms_.emplace(key, c);
        return r;
    }

    // Restriction zbar = 0 (keep_z) or z = 0 (!keep_z).
    TruncatedSeries pure_part(bool keep_z) const {
        TruncatedSeries r(n_, dz_, dzb_);
        for (const auto& [key, c] : terms_) {
            if (keep_z && key.second.is_zero()) r.terms_.emplace(key, c);
            if (!keep_z && key.first.is_zero()) r.terms_.emplace(key, c);
        }
        return r;
    }

    int max_z_degree() const {
        int d = 0;
        for (const auto& [key, c] : terms_) d = std::max(d, key.first.total());
        return d;
    }
    int max_zbar_degree() const {
        int d = 0;
        for (const auto& [key, c] : terms_) d = std::max(d, key.second.total());
        return d;
    }
    // Smallest total degree |m|+|k| over stored terms; 0 for the empty series
    // would be wrong, so returns a large value then.
    int min_total_degree() const {
        int d = kInfDeg;
        for (const auto& [key, c] : terms_)
            d = std::min(d, key.first.total() + key.second.total());
        return d;
    }

    bool operator==(const TruncatedSeries& o) const {
        return n_ == o.n_ && dz_ == o.dz_ && dzb_ == o.dzb_ && terms_ == o.terms_;
    }
    bool operator!=(const TruncatedSeries& o) const { return !(*this == o); }

    std::string str() const {
        std::ostringstream os;
        os << "series[N=" << n_ << ",dz=" << (dz_ == kInfDeg ? -1 : dz_)
           << ",dzb=" << (dzb_ == kInfDeg ? -1 : dzb_) << "]{";
        bool first = true;
        for (const auto& [key, c] : terms_) {
            if (!first) os << ", ";
            first = false;
            os << "z^(";
            for (int i = 0; i < n_; ++i) os << (i ? "," : "") << key.first[i];
            os << ") zb^(";
            for (int i = 0; i < n_; ++i) os << (i ? "," : "") << key.second[i];
            if constexpr (std::is_same_v<R, Rational>)
                os << "): " << to_pq_string(c);
            else
                os << "): " << c.str();
        }
        os << "}";
        return os.str();
    }

    void require_same_dim(const TruncatedSeries& o) const {
        if (o.n_ != n_) throw StructuralError("series: dimension mismatch");
    }

private:
    R zero_like() const {
        if constexpr (std::is_same_v<R, Rational>) {
            return Rational(0);
        } else {
            // coefficient ring with a truncation order: infer from any term
            if (!terms_.empty()) {
                R z = terms_.begin()->second;
                return z - z;
            }
            throw StructuralError("series: cannot synthesize zero coefficient for empty series");
        }
    }

    TruncatedSeries combine(const TruncatedSeries& o, bool subtract) const {
        require_same_dim(o);
        TruncatedSeries r(n_, min_cutoff(dz_, o.dz_), min_cutoff(dzb_, o.dzb_));
        for (const auto& [key, c] : terms_)
            if (key.first.total() <= r.dz_ && key.second.total() <= r.dzb_)
                r.add_term(key.first, key.second, c);
        for (const auto& [key, c] : o.terms_)
            if (key.first.total() <= r.dz_ && key.second.total() <= r.dzb_)
                r.add_term(key.first, key.second, subtract ? -c : c);
        return r;
    }

    int n_;
    int dz_, dzb_;
    TermMap terms_;
};

// True when all certified coefficients of a - b agree on the common region.
template <typename R>
bool equal_on_common(const TruncatedSeries<R>& a, const TruncatedSeries<R>& b) {
    a.require_same_dim(b);
    TruncatedSeries<R> d = a - b;
    return d.stored_zero();
}

template <typename R>
TruncatedSeries<R> constant_series(int dim, const R& c, int dz = kInfDeg, int dzb = kInfDeg) {
    return TruncatedSeries<R>::monomial(dim, MultiIndex(dim), MultiIndex(dim), c, dz, dzb);
}

// exp(f) for f with zero constant term.  An entire argument needs explicit
// target cutoffs since the exponential is not polynomial.
template <typename R>
TruncatedSeries<R> series_exp(const TruncatedSeries<R>& f, int target_dz = -1,
                              int target_dzb = -1) {
    int dz = target_dz >= 0 ? min_cutoff(f.dz(), target_dz) : f.dz();
    int dzb = target_dzb >= 0 ? min_cutoff(f.dzb(), target_dzb) : f.dzb();
    if (dz == kInfDeg || dzb == kInfDeg)
        throw StructuralError("series_exp: entire argument requires target cutoffs");
    TruncatedSeries<R> x = f.truncated(dz, dzb);
    MultiIndex origin(f.dim());
    if (!x.stored_zero() && !kstar::is_zero(x.coeff(origin, origin)))
        throw DomainError("series_exp: nonzero constant term");
    TruncatedSeries<R> result = x;  // j = 1 term
    TruncatedSeries<R> term = x;
    for (int j = 2; j <= dz + dzb; ++j) {
        term = term * x;
        term = term.scaled(Rational(1, j));
        if (term.stored_zero()) break;  // x nilpotent within cutoffs
        result += term;
    }
    // add the constant 1
    if constexpr (std::is_same_v<R, Rational>) {
        result.add_term(MultiIndex(f.dim()), MultiIndex(f.dim()), Rational(1));
    } else {
        // infer truncation order from f's terms; exp of a zero series is 1
        // with the order of the ring elements in f
        if (f.terms().empty())
            throw StructuralError("series_exp: cannot infer coefficient ring order");
        R unit = f.terms().begin()->second;
        unit = unit - unit;
        unit.coeff(0) = Rational(1);
        result.add_term(MultiIndex(f.dim()), MultiIndex(f.dim()), unit);
    }
    return result;
}

// log(g) for g with constant term 1.
template <typename R>
TruncatedSeries<R> series_log(const TruncatedSeries<R>& g) {
    if (g.dz() == kInfDeg || g.dzb() == kInfDeg)
        throw StructuralError("series_log: entire argument requires truncation first");
    MultiIndex z0(g.dim());
    R c0 = g.coeff(z0, z0);
    bool ok;
    if constexpr (std::is_same_v<R, Rational>)
        ok = (c0 == Rational(1));
    else {
        R unit = c0 - c0;
        unit.coeff(0) = Rational(1);
        ok = (c0 == unit);
    }
    if (!ok) throw DomainError("series_log: constant term must be 1");
    TruncatedSeries<R> u = g;
    if constexpr (std::is_same_v<R, Rational>)
        u.add_term(z0, z0, Rational(-1));
    else {
        R negone = c0 - c0;
        negone.coeff(0) = Rational(-1);
        u.add_term(z0, z0, negone);
    }
    TruncatedSeries<R> result = u;  // j = 1
    TruncatedSeries<R> upow = u;
    Rational sign = 1;
    for (int j = 2; j <= g.dz() + g.dzb(); ++j) {
        upow = upow * u;
        if (upow.stored_zero()) break;
        sign = -sign;
        result += upow.scaled(sign / j);
    }
    return result;
}

// Substitution z -> lambda z, zbar -> lambdabar zbar with rational lambda.
template <typename R>
TruncatedSeries<R> dilated(const TruncatedSeries<R>& f, const Rational& lambda,
                           const Rational& lambda_bar) {
    TruncatedSeries<R> r(f.dim(), f.dz(), f.dzb());
    for (const auto& [key, c] : f.terms()) {
        Rational scale = 1;
        for (int t = 0; t < key.first.total(); ++t) scale *= lambda;
        for (int t = 0; t < key.second.total(); ++t) scale *= lambda_bar;
        R v = c;
        ring_scale(v, scale);
        r.add_term(key.first, key.second, std::move(v));
    }
    return r;
}

using QSeries = TruncatedSeries<Rational>;

}  // namespace kstar
