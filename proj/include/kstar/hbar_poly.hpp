#pragma once

#include <string>
#include <vector>

#include "kstar/errors.hpp"
#include "kstar/rational.hpp"

namespace kstar {

// Truncated polynomial ring Q[h]/(h^{K+1}) with exact rational coefficients.
// Used for the formal deformation parameter; also reused as a generic
// truncated one-parameter ring (e.g. a formal shift parameter).  All
// operands of a binary operation must share the truncation order.
class HbarPoly {
public:
    explicit HbarPoly(int order) : c_(static_cast<std::size_t>(order) + 1) {
        if (order < 0) throw StructuralError("HbarPoly: negative order");
    }

    static HbarPoly constant(int order, const Rational& q) {
        HbarPoly p(order);
        p.c_[0] = q;
        return p;
    }

    static HbarPoly monomial(int order, int k, const Rational& q) {
        HbarPoly p(order);
        if (k < 0) throw StructuralError("HbarPoly: negative power");
        if (k <= order) p.c_[static_cast<std::size_t>(k)] = q;
        return p;
    }

    int order() const { return static_cast<int>(c_.size()) - 1; }

    const Rational& coeff(int k) const { return c_[static_cast<std::size_t>(k)]; }
    Rational& coeff(int k) { return c_[static_cast<std::size_t>(k)]; }

    bool is_zero() const {
        for (const auto& q : c_)
            if (!q.is_zero()) return false;
        return true;
    }

    HbarPoly& operator+=(const HbarPoly& o) {
        require_same_order(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    HbarPoly& operator-=(const HbarPoly& o) {
        require_same_order(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    HbarPoly operator+(const HbarPoly& o) const {
        HbarPoly r = *this;
        r += o;
        return r;
    }
    HbarPoly operator-(const HbarPoly& o) const {
        HbarPoly r = *this;
        r -= o;
        return r;
    }
    HbarPoly operator-() const {
        HbarPoly r = *this;
        for (auto& q : r.c_) q = -q;
        return r;
    }

    // Product truncated at the shared order.
    HbarPoly operator*(const HbarPoly& o) const {
        require_same_order(o);
        HbarPoly r(order());
        for (int i = 0; i <= order(); ++i) {
            if (c_[static_cast<std::size_t>(i)].is_zero()) continue;
            for (int j = 0; i + j <= order(); ++j) {
                if (o.c_[static_cast<std::size_t>(j)].is_zero()) continue;
                r.c_[static_cast<std::size_t>(i + j)] +=
                    c_[static_cast<std::size_t>(i)] * o.c_[static_cast<std::size_t>(j)];
            }
        }
        return r;
    }

    bool operator==(const HbarPoly& o) const {
        require_same_order(o);
        return c_ == o.c_;
    }
    bool operator!=(const HbarPoly& o) const { return !(*this == o); }

    Rational evaluate(const Rational& h) const {
        Rational r = 0;
        for (std::size_t i = c_.size(); i-- > 0;) r = r * h + c_[i];
        return r;
    }

    std::string str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (i) s += ", ";
            s += to_pq_string(c_[i]);
        }
        return s + "]";
    }

private:
    void require_same_order(const HbarPoly& o) const {
        if (o.order() != order()) throw StructuralError("HbarPoly: order mismatch");
    }

    std::vector<Rational> c_;
};

// Ring shims used by the generic series template.
inline bool is_zero(const HbarPoly& p) { return p.is_zero(); }

inline void ring_scale(Rational& r, const Rational& q) { r *= q; }
inline void ring_scale(HbarPoly& p, const Rational& q) {
    for (int k = 0; k <= p.order(); ++k) p.coeff(k) *= q;
}

// Expansion of 1/(1 - a*h) = sum_k a^k h^k, truncated.
inline HbarPoly geometric_inverse(int order, const Rational& a) {
    HbarPoly p(order);
    Rational pw = 1;
    for (int k = 0; k <= order; ++k) {
        p.coeff(k) = pw;
        pw *= a;
    }
    return p;
}

}  // namespace kstar
