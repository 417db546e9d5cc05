#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kstar/fock.hpp"
#include "kstar/kahler.hpp"
#include "kstar/multi_index.hpp"
#include "kstar/rational.hpp"
#include "kstar/series.hpp"

namespace kstar {

// Scalar of the form c*sqrt(r) with both parts rational and r >= 0.
// Basis-change coefficients between normalized bases carry square roots of
// factorial ratios; keeping the radicand explicit lets products collapse back
// to rationals exactly when they should, with no floating point involved.
// Construction extracts perfect-square radicands immediately, so a collapsed
// value always has r == 1.
struct SqrtRational {
    Rational c = 0;
    Rational r = 1;

    SqrtRational() = default;
    SqrtRational(Rational c_, Rational r_);

    bool is_zero() const { return c.is_zero(); }
    bool is_rational() const { return r == 1; }

    SqrtRational operator*(const SqrtRational& o) const;
    // Sums are only defined between equal radicands; anything else means the
    // caller mixed incompatible bookkeeping.
    SqrtRational operator+(const SqrtRational& o) const;
    bool operator==(const SqrtRational& o) const { return c == o.c && r == o.r; }

    // The rational value; throws unless the radicand collapsed to 1.
    Rational rational() const;

    std::string str() const;
};

// Holomorphic coordinate change between two charts, expanded about a base
// point in the overlap: component series w^i(z) in u = z - base with an
// invertible linear part, plus the holomorphic shift phi(z) splitting the
// potential difference as
//   Phi_w(w, wbar) = Phi_z(z, zbar) + phi(z) + conj(phi)(zbar).
// All series must be purely holomorphic and phi must vanish at the base
// point (potentials are normalized, so the split determines phi up to an
// imaginary constant that drops out of every weight).
struct AnalyticTransition {
    std::vector<QSeries> w_of_z;
    QSeries phi_hol{0, kInfDeg, kInfDeg};
    std::vector<Rational> base;

    int dim() const { return static_cast<int>(w_of_z.size()); }
};

AnalyticTransition identity_transition(int dim);

// Taylor data of the weighted coordinate powers: for each alpha with
// |alpha| <= alpha_max, the series w(z)^alpha * exp(-phi(z)/hbar) in u,
// truncated at total degree beta_cut.  The coefficient of u^beta is the
// transition coefficient C^alpha_beta; the antiholomorphic mirror has the
// same coefficients because everything here is rational.
std::map<MultiIndex, QSeries> transition_coefficients(const AnalyticTransition& t,
                                                      const Rational& hbar, int alpha_max,
                                                      int beta_cut);

// Expansion of one chart's basis elements in another chart's basis, in the
// normalized-basis convention (entries carry explicit square roots).  Row
// keys are (m, n) pairs of the expanded source chart, column keys (i, j)
// pairs of the expressing target chart.  Entries are complete up to the
// recorded blocks: every source pair with |m| <= bm, |n| <= bn has its image
// stored through |i| <= ai, |j| <= aj.
struct TransitionMatrix {
    using Key = std::pair<MultiIndex, MultiIndex>;

    int dim = 0;
    int bm = 0, bn = 0;  // certified source block
    int ai = 0, aj = 0;  // certified target block
    std::map<std::pair<Key, Key>, SqrtRational> a;

    void add(const Key& src, const Key& dst, const SqrtRational& v);
    SqrtRational coeff(const Key& src, const Key& dst) const;

    std::string str() const;
};

// Builds the matrix expanding the w-chart basis in the z-chart basis.  The
// z-chart context supplies the inverse coefficient block, the w-chart
// context the coefficient rows of its weight expansion; those rows must
// terminate, so the w-chart potential has to be radial.  The transition t
// maps z-chart coordinates to w-chart coordinates and must be expanded about
// the z-chart origin, where both coefficient matrices live.
TransitionMatrix transition_matrix(const AnalyticTransition& t, const FockContext& ctx_z,
                                   const FockContext& ctx_w, int bm = -1, int bn = -1,
                                   int beta_cut = -1);

// Re-expresses a matrix of coefficients over the source-chart basis of T in
// the target chart.  The operand must be certified and supported inside T's
// source block; all square roots cancel against the unnormalized-basis
// conversion, so the result is exact.
FockMatrix apply_transition(const TransitionMatrix& T, const FockMatrix& A);

// (second o first): apply first, then second.  The certified target block of
// first must sit inside the certified source block of second.
TransitionMatrix compose_transitions(const TransitionMatrix& second,
                                     const TransitionMatrix& first);

// True when T maps every source pair in its block to itself with unit
// coefficient and nothing else.
bool transition_is_identity(const TransitionMatrix& T);

// Index bookkeeping for the finite block algebra of the projective model at
// integer inverse parameter L.  Chart labels run over the N+1 homogeneous
// coordinates; a chart's multi-index components are ordered by the remaining
// labels.  The map sends a chart-a index pair to its chart-b counterpart:
// the component at label b is dropped, and L - |m| (resp. L - |n|) is
// inserted at label a.  factor is the exact basis relation
//   E^b_{m', n'} = factor * E^a_{m, n}
// in the unnormalized basis, where it is the rational (L - |n|)! / n_b!.
struct FiniteTransition {
    MultiIndex m, n;
    Rational factor;
};

FiniteTransition cpn_transition_finite(int a, int b, long L, const MultiIndex& m,
                                       const MultiIndex& n);

// Transports coefficients: sends sum A_{mn} E^a_{mn} to the same element
// written over the chart-b basis.  A must be certified and supported inside
// the finite block.
FockMatrix cpn_transition_apply(const FockMatrix& A, int a, int b, long L);

// The same map in matrix form with the normalized-basis square roots made
// explicit; composing with the reverse map collapses to the identity.
TransitionMatrix cpn_finite_transition_matrix(int a, int b, long L, int dim);

// Projection onto the finite block: zeroes every entry with |m| > L or
// |n| > L.  On the projective model at integer 1/hbar = L the discarded
// basis elements represent the zero function, so the projection is an
// algebra homomorphism there.
FockMatrix f_l_project(const FockMatrix& A, long L);

// Creation/annihilation pair restricted to the finite block: the plain
// shift operators with every term reaching outside |n| <= L removed.  First
// element raises the row index in slot i, second lowers it.  L = 0 gives
// zero operators.
std::pair<FockMatrix, FockMatrix> shifted_operators(const FockContext& ctx, int i);

// Closed form of [lower_i, raise_j] on the finite block.  For i == j it is
// the block identity minus a boundary correction supported on |n| = L; for
// i != j the unrestricted shifts commute outright, and only a rim defect on
// |n| = L survives the restriction.
FockMatrix shifted_commutator_closed(const FockContext& ctx, int i, int j);

// Negative gluing example on the flat one-dimensional model: the basis
// function z zbar e^{-z zbar/hbar} is not invariant under z -> z + s.  If it
// were, the shifted function would be proportional to the original, so the
// series below (the shifted polynomial-times-relative-weight data, rescaled
// to match the original at the (1,1) coefficient) would vanish identically.
// Its constant term is s^2, nonzero for every nonzero shift; the cylinder
// identification step is s = 2*pi, so the local bases cannot be glued.
QSeries cylinder_shift_residual(const Rational& hbar, const Rational& shift, int cut);

}  // namespace kstar
