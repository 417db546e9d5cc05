#pragma once

#include <vector>

#include "kstar/series.hpp"

namespace kstar {

// Square matrix of truncated series, used for metrics and their inverses.
template <typename R>
class SeriesMatrix {
public:
    SeriesMatrix(int rows, const TruncatedSeries<R>& fill)
        : rows_(rows), data_(static_cast<std::size_t>(rows) * rows, fill) {
        if (rows <= 0) throw StructuralError("matrix: non-positive size");
    }

    static SeriesMatrix zeros(int rows, int dim, int dz, int dzb) {
        return SeriesMatrix(rows, TruncatedSeries<R>::zero(dim, dz, dzb));
    }

    int rows() const { return rows_; }

    const TruncatedSeries<R>& at(int i, int j) const {
        return data_[static_cast<std::size_t>(i) * rows_ + j];
    }
    TruncatedSeries<R>& at(int i, int j) { return data_[static_cast<std::size_t>(i) * rows_ + j]; }

    SeriesMatrix operator+(const SeriesMatrix& o) const {
        require_same_shape(o);
        SeriesMatrix r = *this;
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] += o.data_[i];
        return r;
    }

    SeriesMatrix operator-(const SeriesMatrix& o) const {
        require_same_shape(o);
        SeriesMatrix r = *this;
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] -= o.data_[i];
        return r;
    }

    SeriesMatrix operator*(const SeriesMatrix& o) const {
        require_same_shape(o);
        SeriesMatrix r = *this;
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < rows_; ++j) {
                TruncatedSeries<R> acc = at(i, 0) * o.at(0, j);
                for (int k = 1; k < rows_; ++k) acc += at(i, k) * o.at(k, j);
                r.at(i, j) = acc;
            }
        return r;
    }

    bool stored_zero() const {
        for (const auto& s : data_)
            if (!s.stored_zero()) return false;
        return true;
    }

    void require_same_shape(const SeriesMatrix& o) const {
        if (o.rows_ != rows_) throw StructuralError("matrix: shape mismatch");
        if (!data_.empty() && !o.data_.empty()) data_[0].require_same_dim(o.data_[0]);
    }

private:
    int rows_;
    std::vector<TruncatedSeries<R>> data_;
};

// Exact inverse of the constant-term matrix by Gauss-Jordan elimination.
// Throws DegenerateMetricError when singular.
inline std::vector<std::vector<Rational>> invert_constant_matrix(
    std::vector<std::vector<Rational>> a) {
    const int n = static_cast<int>(a.size());
    std::vector<std::vector<Rational>> inv(static_cast<std::size_t>(n),
                                           std::vector<Rational>(static_cast<std::size_t>(n), 0));
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (!a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)].is_zero()) {
                pivot = r;
                break;
            }
        if (pivot < 0) throw DegenerateMetricError("singular constant-term matrix");
        std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(pivot)]);
        std::swap(inv[static_cast<std::size_t>(col)], inv[static_cast<std::size_t>(pivot)]);
        Rational p = a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
        for (int j = 0; j < n; ++j) {
            a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] /= p;
            inv[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            Rational f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
            if (f.is_zero()) continue;
            for (int j = 0; j < n; ++j) {
                a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -=
                    f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
                inv[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -=
                    f * inv[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
            }
        }
    }
    return inv;
}

// Inverse of M = M0 + M' where M0 is the constant term: invert M0 exactly,
// then sum the Neumann series of -M0^{-1} M', which is nilpotent within the
// truncation.  An entire argument whose higher part vanishes stays entire
// (constant matrices invert exactly); otherwise explicit target cutoffs are
// required for an entire argument.
inline SeriesMatrix<Rational> matrix_inverse(const SeriesMatrix<Rational>& m,
                                             int target_dz = -1, int target_dzb = -1) {
    const int n = m.rows();
    const int dim = m.at(0, 0).dim();
    MultiIndex origin(dim);

    std::vector<std::vector<Rational>> m0(static_cast<std::size_t>(n),
                                          std::vector<Rational>(static_cast<std::size_t>(n), 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m0[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                m.at(i, j).coeff(origin, origin);
    auto m0inv = invert_constant_matrix(m0);

    int dz0 = m.at(0, 0).dz(), dzb0 = m.at(0, 0).dzb();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            dz0 = min_cutoff(dz0, m.at(i, j).dz());
            dzb0 = min_cutoff(dzb0, m.at(i, j).dzb());
        }
    int dz = dz0, dzb = dzb0;
    if (target_dz >= 0) dz = min_cutoff(dz, target_dz);
    if (target_dzb >= 0) dzb = min_cutoff(dzb, target_dzb);

    // higher-order part E = M0^{-1} (M - M0)
    bool higher_zero = true;
    for (int i = 0; i < n && higher_zero; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& s = m.at(i, j);
            for (const auto& [key, c] : s.terms())
                if (!(key.first.is_zero() && key.second.is_zero())) {
                    higher_zero = false;
                    break;
                }
            if (!higher_zero) break;
        }

    auto const_mat = [&](const std::vector<std::vector<Rational>>& cm, int cdz, int cdzb) {
        SeriesMatrix<Rational> r = SeriesMatrix<Rational>::zeros(n, dim, cdz, cdzb);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                r.at(i, j).add_term(origin, origin,
                                    cm[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        return r;
    };

    if (higher_zero) {
        // exact constant inverse; keep the argument's certification
        return const_mat(m0inv, dz0, dzb0);
    }

    if (dz == kInfDeg || dzb == kInfDeg)
        throw StructuralError("matrix_inverse: entire argument requires target cutoffs");

    SeriesMatrix<Rational> m0inv_s = const_mat(m0inv, dz, dzb);
    SeriesMatrix<Rational> e = m0inv_s * m;  // 1 + E
    for (int i = 0; i < n; ++i) e.at(i, i).add_term(origin, origin, Rational(-1));

    SeriesMatrix<Rational> acc = const_mat(m0inv, dz, dzb);  // k = 0 term times M0^{-1}
    SeriesMatrix<Rational> pw = m0inv_s;
    for (int k = 1; k <= dz + dzb; ++k) {
        pw = e * pw;
        if (pw.stored_zero()) break;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                acc.at(i, j) += (k % 2 ? -pw.at(i, j) : pw.at(i, j));
    }
    return acc;
}

}  // namespace kstar
