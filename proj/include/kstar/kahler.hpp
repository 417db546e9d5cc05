#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kstar/series.hpp"
#include "kstar/series_matrix.hpp"

namespace kstar {

// Built-in geometries.  CylinderChart is the flat one-dimensional potential
// tagged with the periodic identification z ~ z + 2*pi of its chart; the tag
// matters only to the translation-invariance check.
enum class Model { Cn, CylinderChart, CPn, CHn, Custom };

std::string model_name(Model m);
std::optional<Model> model_from_name(const std::string& name);

struct KahlerPotential {
    QSeries phi;
    Model model = Model::Custom;
    bool normalized = false;

    int dim() const { return phi.dim(); }
};

// Drops all pure-z, pure-zbar and constant terms, which leaves the metric
// unchanged and pins phi(z,0) = phi(0,zbar) = 0.
KahlerPotential normalize_potential(const KahlerPotential& p);

// Expansion of the built-in potential about the chart origin.  Cn and the
// cylinder chart are exact polynomials; CPn and CHn are truncated at the
// given cutoffs.
KahlerPotential builtin_potential(Model model, int dim, int dz, int dzb);

// g_{i jbar} = d_{z^i} d_{zbar^j} phi, indexed at(i, j).
SeriesMatrix<Rational> metric(const KahlerPotential& p);

// Inverse metric: at(i, j) = g^{ibar j}, so that
// sum_j g^{ibar j} g_{j kbar} = delta_{ik}.
SeriesMatrix<Rational> metric_inverse(const SeriesMatrix<Rational>& g, int target_dz = -1,
                                      int target_dzb = -1);

// Geometry bundle at working cutoffs.  Consumers truncate to what they need;
// the working pad absorbs the certification losses of derivatives and metric
// contractions.
struct KahlerData {
    Model model = Model::Custom;
    int dim = 0;
    int user_dz = 0, user_dzb = 0;
    KahlerPotential phi;            // normalized, at working cutoffs
    SeriesMatrix<Rational> g;       // metric
    SeriesMatrix<Rational> ginv;    // inverse metric

    static KahlerData build(Model model, int dim, int user_dz, int user_dzb, int pad);
    static KahlerData build_custom(const KahlerPotential& p, int user_dz, int user_dzb,
                                   int pad = 0);
};

// True when every term couples z and zbar through moduli only (m == k), so
// the potential depends on |z^i|^2 alone.
bool is_radial(const QSeries& phi);

// Coefficient matrix of e^{phi/hbar} on monomials z^m zbar^n with
// |m|, |n| <= degree, stored densely over a graded index set.
struct HMatrix {
    int dim = 0;
    int degree = 0;
    Rational hbar;
    std::vector<MultiIndex> index_set;              // graded-lex, |m| <= degree
    std::map<MultiIndex, int> index_of;
    std::vector<std::vector<Rational>> a;           // a[row m][col n]

    const Rational& at(const MultiIndex& m, const MultiIndex& n) const;
    int size() const { return static_cast<int>(index_set.size()); }
};

HMatrix compute_H(const KahlerPotential& p, const Rational& hbar, int degree);

// Whole-matrix inverse of the truncated H.  Throws
// RepresentationFailureError naming the offending degree when singular.
HMatrix invert_H(const HMatrix& h);

// Closed forms for the built-in models (diagonal H).
Rational cpn_H_closed(long L, const MultiIndex& m, const MultiIndex& n);
Rational chn_H_closed(const Rational& inv_hbar, const MultiIndex& m, const MultiIndex& n);

// C(n) := n! * H_{n,n} for radial potentials; requires H diagonal.
std::map<MultiIndex, Rational> radial_C(const HMatrix& h);

}  // namespace kstar
