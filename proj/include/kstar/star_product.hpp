#pragma once

#include <map>
#include <vector>

#include "kstar/hbar_poly.hpp"
#include "kstar/kahler.hpp"
#include "kstar/series.hpp"

namespace kstar {

// Series graded by powers of the deformation parameter.  Each order carries
// its own certified region; order t of a product receives contributions from
// operator order n applied to argument order t - n.
struct FormalSeries {
    int dim = 0;
    std::vector<QSeries> c;  // index = power of hbar, size = order + 1

    FormalSeries() = default;
    FormalSeries(int dim_, int order, int dz, int dzb)
        : dim(dim_), c(static_cast<std::size_t>(order) + 1, QSeries::zero(dim_, dz, dzb)) {}

    static FormalSeries from_series(const QSeries& f, int order);

    int order() const { return static_cast<int>(c.size()) - 1; }
    QSeries& at(int t) { return c[static_cast<std::size_t>(t)]; }
    const QSeries& at(int t) const { return c[static_cast<std::size_t>(t)]; }

    FormalSeries operator+(const FormalSeries& o) const;
    FormalSeries operator-(const FormalSeries& o) const;
    bool stored_zero() const;

    FormalSeries conj() const;  // the deformation parameter is real

    // Collapse to a series with truncated-polynomial coefficients; the
    // certification is the intersection over all orders.
    TruncatedSeries<HbarPoly> collapse() const;

    // Substitute a positive rational value for the parameter (plain
    // evaluation of the polynomial grading; no convergence claim).
    QSeries evaluate(const Rational& hbar) const;
};

bool equal_on_common(const FormalSeries& a, const FormalSeries& b);

// Shared geometry plus memoized operator data for one model at fixed
// working cutoffs.  capz/capzb bound every stored degree flowing through
// operator construction and application.
class StarContext {
public:
    StarContext(const KahlerData& kd, int order);

    const KahlerData& kd() const { return kd_; }
    int order() const { return order_; }
    int capz() const { return capz_; }
    int capzb() const { return capzb_; }

    // Derivation D^{ibar} u = sum_j g^{ibar j} d_{z^j} u.
    QSeries dbar_apply(int i, const QSeries& u) const;

    // Normal-ordered [d_{zbar^l}, D^I] as a map J -> coefficient of D^J.
    const std::map<MultiIndex, QSeries>& comm_dbar_word(int l, const MultiIndex& I);

private:
    const KahlerData& kd_;
    int order_;
    int capz_, capzb_;
    std::vector<std::vector<std::vector<QSeries>>> lambda_;  // [i][l][m]
    std::map<std::pair<int, MultiIndex>, std::map<MultiIndex, QSeries>> comm_cache_;
};

enum class OperatorSide { Left, Right };

// Differential operator sum_n hbar^n sum_I coef^{(n)}_I D^I in the
// commuting-derivation basis determined by the side: left operators
// differentiate holomorphically (D^{ibar} = g^{ibar j} d_{z^j}), right
// operators antiholomorphically.
struct DiffOperator {
    int dim = 0;
    OperatorSide side = OperatorSide::Left;
    std::vector<std::map<MultiIndex, QSeries>> levels;  // levels[n][I]

    int order() const { return static_cast<int>(levels.size()) - 1; }
};

// Left multiplication operator of f: the unique sum_n hbar^n A^(n) with
// degree-n derivations, A^(0) = f, vanishing constant parts for n >= 1,
// commuting with hbar d_{zbar^l} + (d_{zbar^l} phi).  Triangular exact
// solve, order by order.
DiffOperator build_left_operator(const QSeries& f, StarContext& ctx);

// Mirror operator of right multiplication, obtained by conjugation
// transport of the left recursion.
DiffOperator build_right_operator(const QSeries& f, StarContext& ctx);

FormalSeries apply_operator(const DiffOperator& op, const FormalSeries& g, StarContext& ctx);

// Star product with separation of variables, graded by the parameter.
FormalSeries star_formal(const FormalSeries& f, const FormalSeries& g, StarContext& ctx);
FormalSeries star_formal(const QSeries& f, const QSeries& g, StarContext& ctx);

// Flat closed form: sum_beta h^{|beta|}/beta! (dbar^beta f)(d^beta g).
// Requires exact polynomial inputs; the sum then terminates on its own and
// every retained order is exact.
FormalSeries star_closed_cn(const QSeries& f, const QSeries& g, int order);

// Covariant closed form for the projective/hyperbolic family:
// sum_n c_n(hbar) g_{j1 k1bar}...(D^{j...} f)(D^{k1bar...} g).
// Formal mode: coefficients expanded through `order`.
FormalSeries star_closed_fubini(Model model, const QSeries& f, const QSeries& g,
                                const KahlerData& kd, int order);
// Numeric mode: terms summed through n_max at fixed hbar.  On the projective
// model 1/hbar = L integral requires n_max <= L (pole in c_{L+1}).
QSeries star_closed_fubini_numeric(Model model, const QSeries& f, const QSeries& g,
                                   const KahlerData& kd, const Rational& hbar, int n_max);

// c_n coefficient of the covariant expansion, exact.
HbarPoly fubini_c_formal(Model model, int n, int order);
Rational fubini_c_numeric(Model model, int n, const Rational& hbar);

}  // namespace kstar
