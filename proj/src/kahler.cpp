#include "kstar/kahler.hpp"

namespace kstar {

std::string model_name(Model m) {
    switch (m) {
        case Model::Cn: return "cn";
        case Model::CylinderChart: return "cylinder";
        case Model::CPn: return "cpn";
        case Model::CHn: return "chn";
        case Model::Custom: return "custom";
    }
    return "custom";
}

std::optional<Model> model_from_name(const std::string& name) {
    if (name == "cn") return Model::Cn;
    if (name == "cylinder") return Model::CylinderChart;
    if (name == "cpn") return Model::CPn;
    if (name == "chn") return Model::CHn;
    if (name == "custom") return Model::Custom;
    return std::nullopt;
}

KahlerPotential normalize_potential(const KahlerPotential& p) {
    QSeries out(p.phi.dim(), p.phi.dz(), p.phi.dzb());
    for (const auto& [key, c] : p.phi.terms())
        if (!key.first.is_zero() && !key.second.is_zero()) out.add_term(key.first, key.second, c);
    return KahlerPotential{out, p.model, true};
}

namespace {

// sum_i z^i zbar^i as an exact polynomial
QSeries modulus_sum(int dim) {
    QSeries s = QSeries::entire(dim);
    for (int i = 0; i < dim; ++i)
        s.add_term(MultiIndex::unit(dim, i), MultiIndex::unit(dim, i), Rational(1));
    return s;
}

// sum_{j>=1} sign^{j+1} s^j / j, i.e. log(1+s) for sign=+1 and -log(1-s)
// for sign=-1, truncated
QSeries log_like(int dim, int dz, int dzb, int sign) {
    QSeries s = modulus_sum(dim).truncated(dz, dzb);
    QSeries acc = QSeries::zero(dim, dz, dzb);
    QSeries pw = constant_series(dim, Rational(1), dz, dzb);
    Rational sgn(1);
    for (int j = 1; j <= std::min(dz, dzb); ++j) {
        pw = pw * s;
        if (pw.stored_zero()) break;
        if (sign > 0) {
            acc += pw.scaled(sgn / j);  // alternating
            sgn = -sgn;
        } else {
            acc += pw.scaled(Rational(1, j));
        }
    }
    return acc;
}

void require_real(const QSeries& phi) {
    for (const auto& [key, c] : phi.terms()) {
        if (!phi.certified_at(key.second, key.first)) continue;
        if (phi.coeff(key.second, key.first) != c)
            throw DomainError("potential is not real-valued");
    }
}

}  // namespace

KahlerPotential builtin_potential(Model model, int dim, int dz, int dzb) {
    if (dim <= 0) throw StructuralError("builtin_potential: dimension must be positive");
    switch (model) {
        case Model::Cn:
            return KahlerPotential{modulus_sum(dim), model, true};
        case Model::CylinderChart:
            if (dim != 1) throw StructuralError("cylinder chart is one-dimensional");
            return KahlerPotential{modulus_sum(1), model, true};
        case Model::CPn:
            return KahlerPotential{log_like(dim, dz, dzb, +1), model, true};
        case Model::CHn:
            return KahlerPotential{log_like(dim, dz, dzb, -1), model, true};
        case Model::Custom:
            throw StructuralError("builtin_potential: custom model has no built-in expansion");
    }
    throw StructuralError("builtin_potential: unknown model");
}

SeriesMatrix<Rational> metric(const KahlerPotential& p) {
    if (!p.normalized) throw DomainError("metric: potential must be normalized");
    const int n = p.dim();
    SeriesMatrix<Rational> g = SeriesMatrix<Rational>::zeros(
        n, n, p.phi.dz() == kInfDeg ? kInfDeg : p.phi.dz() - 1,
        p.phi.dzb() == kInfDeg ? kInfDeg : p.phi.dzb() - 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g.at(i, j) = p.phi.diff(i, false).diff(j, true);
    return g;
}

SeriesMatrix<Rational> metric_inverse(const SeriesMatrix<Rational>& g, int target_dz,
                                      int target_dzb) {
    return matrix_inverse(g, target_dz, target_dzb);
}

KahlerData KahlerData::build(Model model, int dim, int user_dz, int user_dzb, int pad) {
    if (pad < 0) throw StructuralError("KahlerData: negative pad");
    KahlerPotential p = builtin_potential(model, dim, user_dz + pad, user_dzb + pad);
    KahlerData kd{model, dim, user_dz, user_dzb, p, metric(p), SeriesMatrix<Rational>::zeros(dim, dim, 0, 0)};
    kd.ginv = metric_inverse(kd.g, user_dz + pad, user_dzb + pad);
    return kd;
}

KahlerData KahlerData::build_custom(const KahlerPotential& p, int user_dz, int user_dzb,
                                    int pad) {
    require_real(p.phi);
    KahlerPotential np = p.normalized ? p : normalize_potential(p);
    KahlerData kd{Model::Custom, np.dim(), user_dz, user_dzb, np, metric(np),
                  SeriesMatrix<Rational>::zeros(np.dim(), np.dim(), 0, 0)};
    // Entire polynomial potentials still have non-polynomial inverse metrics
    // in general, so the Neumann series needs an explicit finite target then.
    int tz = np.phi.is_entire() ? user_dz + pad : -1;
    int tzb = np.phi.is_entire() ? user_dzb + pad : -1;
    kd.ginv = metric_inverse(kd.g, tz, tzb);
    return kd;
}

bool is_radial(const QSeries& phi) {
    for (const auto& [key, c] : phi.terms())
        if (key.first != key.second) return false;
    return true;
}

const Rational& HMatrix::at(const MultiIndex& m, const MultiIndex& n) const {
    auto im = index_of.find(m);
    auto in = index_of.find(n);
    if (im == index_of.end() || in == index_of.end())
        throw StructuralError("HMatrix: index outside stored degree");
    return a[static_cast<std::size_t>(im->second)][static_cast<std::size_t>(in->second)];
}

HMatrix compute_H(const KahlerPotential& p, const Rational& hbar, int degree) {
    if (hbar <= 0) throw DomainError("compute_H: hbar must be positive");
    if (!p.normalized) throw DomainError("compute_H: potential must be normalized");
    if (degree < 0) throw StructuralError("compute_H: negative degree");
    if (!p.phi.is_entire() && (p.phi.dz() < degree || p.phi.dzb() < degree))
        throw StructuralError("compute_H: potential certified region smaller than degree");

    QSeries e = series_exp(p.phi.scaled(Rational(1) / hbar), degree, degree);

    HMatrix h;
    h.dim = p.dim();
    h.degree = degree;
    h.hbar = hbar;
    h.index_set = multi_indices_leq(p.dim(), degree);
    for (int i = 0; i < static_cast<int>(h.index_set.size()); ++i)
        h.index_of[h.index_set[static_cast<std::size_t>(i)]] = i;
    h.a.assign(h.index_set.size(), std::vector<Rational>(h.index_set.size(), Rational(0)));
    for (const auto& [key, c] : e.terms()) h.a[static_cast<std::size_t>(h.index_of.at(key.first))]
                                               [static_cast<std::size_t>(h.index_of.at(key.second))] = c;
    return h;
}

HMatrix invert_H(const HMatrix& h) {
    HMatrix inv = h;
    const int n = h.size();
    // Gauss-Jordan with explicit failure reporting
    auto a = h.a;
    std::vector<std::vector<Rational>> id(static_cast<std::size_t>(n),
                                          std::vector<Rational>(static_cast<std::size_t>(n), 0));
    for (int i = 0; i < n; ++i) id[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (!a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)].is_zero()) {
                pivot = r;
                break;
            }
        if (pivot < 0) {
            const MultiIndex& bad = h.index_set[static_cast<std::size_t>(col)];
            throw RepresentationFailureError(
                "truncated H matrix is singular at column degree " + std::to_string(bad.total()) +
                "; no Fock dictionary at this truncation");
        }
        std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(pivot)]);
        std::swap(id[static_cast<std::size_t>(col)], id[static_cast<std::size_t>(pivot)]);
        Rational p = a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
        for (int j = 0; j < n; ++j) {
            a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] /= p;
            id[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            Rational f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
            if (f.is_zero()) continue;
            for (int j = 0; j < n; ++j) {
                a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -=
                    f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
                id[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -=
                    f * id[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
            }
        }
    }
    inv.a = std::move(id);
    return inv;
}

Rational cpn_H_closed(long L, const MultiIndex& m, const MultiIndex& n) {
    if (m != n) return Rational(0);
    if (m.total() > L) return Rational(0);
    // Gamma(L+1) / (m! Gamma(L - |m| + 1)) = falling factorial L...(L-|m|+1) / m!
    return gamma_ratio_falling(Rational(L), m.total()) / m.fact();
}

Rational chn_H_closed(const Rational& inv_hbar, const MultiIndex& m, const MultiIndex& n) {
    if (m != n) return Rational(0);
    // Gamma(1/hbar + |n|) / (n! Gamma(1/hbar))
    return gamma_ratio_rising(inv_hbar, m.total()) / m.fact();
}

std::map<MultiIndex, Rational> radial_C(const HMatrix& h) {
    for (const auto& m : h.index_set)
        for (const auto& n : h.index_set)
            if (m != n && !h.at(m, n).is_zero())
                throw DomainError("radial_C: H is not diagonal; potential not radial");
    std::map<MultiIndex, Rational> c;
    for (const auto& m : h.index_set) c[m] = m.fact() * h.at(m, m);
    return c;
}

}  // namespace kstar
