#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "kstar/errors.hpp"
#include "kstar/rational.hpp"

namespace kstar {

// Exponent vector over N complex variables.  Entries are small non-negative
// integers; the total degree is what truncation cutoffs bound.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(int n) : e_(static_cast<std::size_t>(n), 0) {
        if (n < 0) throw StructuralError("MultiIndex: negative dimension");
    }
    MultiIndex(std::initializer_list<int> init) : e_(init) { check_entries(); }
    explicit MultiIndex(std::vector<int> v) : e_(std::move(v)) { check_entries(); }

    static MultiIndex unit(int n, int i) {
        MultiIndex m(n);
        m.at(i) += 1;
        return m;
    }

    int dim() const { return static_cast<int>(e_.size()); }
    int total() const { return std::accumulate(e_.begin(), e_.end(), 0); }
    bool is_zero() const { return total() == 0; }

    int operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }
    int& at(int i) { return e_[static_cast<std::size_t>(i)]; }

    MultiIndex operator+(const MultiIndex& o) const {
        require_same_dim(o);
        MultiIndex r = *this;
        for (int i = 0; i < dim(); ++i) r.at(i) += o[i];
        return r;
    }

    // Componentwise difference; caller must ensure o <= *this.
    MultiIndex operator-(const MultiIndex& o) const {
        require_same_dim(o);
        MultiIndex r = *this;
        for (int i = 0; i < dim(); ++i) {
            r.at(i) -= o[i];
            if (r[i] < 0) throw StructuralError("MultiIndex: negative entry in difference");
        }
        return r;
    }

    bool leq(const MultiIndex& o) const {  // componentwise
        require_same_dim(o);
        for (int i = 0; i < dim(); ++i)
            if (e_[static_cast<std::size_t>(i)] > o[i]) return false;
        return true;
    }

    Rational fact() const {
        Rational r = 1;
        for (int v : e_) r *= factorial(v);
        return r;
    }

    // Number of distinct orderings of a tuple realizing this index: |m|!/m!.
    Rational orderings() const { return factorial(total()) / fact(); }

    const std::vector<int>& entries() const { return e_; }

    auto operator<=>(const MultiIndex&) const = default;

private:
    void check_entries() const {
        for (int v : e_)
            if (v < 0) throw StructuralError("MultiIndex: negative entry");
    }
    void require_same_dim(const MultiIndex& o) const {
        if (o.dim() != dim()) throw StructuralError("MultiIndex: dimension mismatch");
    }

    std::vector<int> e_;
};

// Enumerates all multi-indices of dimension n with total degree <= maxtotal,
// in graded-lexicographic order.
inline void for_each_multi_index(int n, int maxtotal,
                                 const std::function<void(const MultiIndex&)>& fn) {
    if (n < 0 || maxtotal < 0) return;
    MultiIndex m(n);
    std::function<void(int, int)> rec = [&](int pos, int budget) {
        if (pos == n) {
            fn(m);
            return;
        }
        for (int v = 0; v <= budget; ++v) {
            m.at(pos) = v;
            rec(pos + 1, budget - v);
        }
        m.at(pos) = 0;
    };
    // group by total degree so the order is graded
    for (int d = 0; d <= maxtotal; ++d) {
        std::function<void(int, int)> rec_exact = [&](int pos, int budget) {
            if (pos == n - 1) {
                m.at(pos) = budget;
                fn(m);
                m.at(pos) = 0;
                return;
            }
            for (int v = 0; v <= budget; ++v) {
                m.at(pos) = v;
                rec_exact(pos + 1, budget - v);
            }
            m.at(pos) = 0;
        };
        if (n == 0) {
            if (d == 0) fn(m);
            continue;
        }
        rec_exact(0, d);
    }
}

inline std::vector<MultiIndex> multi_indices_leq(int n, int maxtotal) {
    std::vector<MultiIndex> out;
    for_each_multi_index(n, maxtotal, [&](const MultiIndex& m) { out.push_back(m); });
    return out;
}

}  // namespace kstar
