#pragma once

#include <random>

#include "kstar/series.hpp"

namespace kstar::testing {

// Deterministic small random rationals and sparse series for property tests.
struct Rng {
    explicit Rng(std::uint64_t seed) : eng(seed) {}

    Rational rational(int num_range = 3, int max_den = 3) {
        std::uniform_int_distribution<int> num(-num_range, num_range);
        std::uniform_int_distribution<int> den(1, max_den);
        // divide rather than use the raw two-argument constructor, which
        // would store the fraction uncanonicalized
        return Rational(num(eng)) / den(eng);
    }

    Rational nonzero_rational(int num_range = 3, int max_den = 3) {
        Rational q = rational(num_range, max_den);
        while (q.is_zero()) q = rational(num_range, max_den);
        return q;
    }

    int uniform(int lo, int hi) {
        std::uniform_int_distribution<int> d(lo, hi);
        return d(eng);
    }

    MultiIndex index(int dim, int max_total) {
        MultiIndex m(dim);
        int budget = uniform(0, max_total);
        for (int i = 0; i < dim && budget > 0; ++i) {
            int v = uniform(0, budget);
            m.at(i) = v;
            budget -= v;
        }
        return m;
    }

    // Sparse series with bidegree bounded by (maxz, maxzb); entire by default.
    QSeries series(int dim, int maxz, int maxzb, int nterms, int dz = kInfDeg,
                   int dzb = kInfDeg) {
        QSeries s(dim, dz, dzb);
        for (int t = 0; t < nterms; ++t)
            s.add_term(index(dim, maxz), index(dim, maxzb), rational());
        return s;
    }

    std::mt19937_64 eng;
};

}  // namespace kstar::testing
