#pragma once

#include <map>
#include <utility>
#include <vector>

#include "kstar/kahler.hpp"
#include "kstar/series.hpp"
#include "kstar/star_product.hpp"

namespace kstar {

// Geometry plus the coefficient matrix of exp(phi/hbar) at a fixed numeric
// parameter.  `fdeg` bounds the function-side degrees the matrix knows;
// `block` bounds the representation indices (columns of the dictionary) and
// is clamped to the level on the projective model at integer 1/hbar, where
// the matrix degenerates beyond it.
struct FockContext {
    KahlerData kd;
    Rational hbar;
    long level = -1;  // integer 1/hbar on the projective model, else -1
    int fdeg = 0;     // H stored through this degree
    int block = 0;    // representation indices bounded by this degree
    int wz = 0, wzb = 0;  // working cutoffs for weight-function series
    HMatrix H;            // degree fdeg
    HMatrix Hinv;         // inverse of the degree-`block` subblock

    int dim() const { return kd.dim; }

    // True when the whole algebra is finite and the block holds all of it:
    // the projective model at integer 1/hbar with the block at the level.
    bool finite_level() const { return level >= 0 && block == static_cast<int>(level); }

    static FockContext build(Model model, int dim, const Rational& hbar, int block, int pad = 6);
    static FockContext build_custom(const KahlerPotential& p, const Rational& hbar, int block,
                                    int pad = 6);
};

// Coefficient matrix A_{m,n} of an element sum A_{m,n} E_{m,n}, where
// E_{m,n} = z^m * vac * (grad phi / hbar)^n and vac = exp(-phi/hbar).
// Certification mirrors the series template: entries with |m| <= cz,
// |n| <= czb are exact, kInfDeg means every entry is known (zero off the
// stored support).
struct FockMatrix {
    using Key = std::pair<MultiIndex, MultiIndex>;

    int dim = 0;
    int cz = kInfDeg, czb = kInfDeg;
    std::map<Key, Rational> a;

    FockMatrix() = default;
    FockMatrix(int dim_, int cz_, int czb_) : dim(dim_), cz(cz_), czb(czb_) {
        if (cz < -1 || czb < -1) throw StructuralError("FockMatrix: bad certification");
    }

    bool certified_at(const MultiIndex& m, const MultiIndex& n) const {
        return m.total() <= cz && n.total() <= czb;
    }
    void add(const MultiIndex& m, const MultiIndex& n, const Rational& q);
    Rational coeff(const MultiIndex& m, const MultiIndex& n) const;

    bool stored_zero() const { return a.empty(); }
    int max_row_degree() const;
    int max_col_degree() const;

    FockMatrix operator+(const FockMatrix& o) const { return combined(o, false); }
    FockMatrix operator-(const FockMatrix& o) const { return combined(o, true); }
    FockMatrix scaled(const Rational& q) const;

    std::string str() const;

private:
    FockMatrix combined(const FockMatrix& o, bool subtract) const;
};

bool equal_on_common(const FockMatrix& a, const FockMatrix& b);

// The four generator families, named by the function they multiply by:
// z^i, zbar^i, d_i phi / hbar, d_ibar phi / hbar.
enum class Gen { Z, Zbar, DPhi, DPhiBar };

QSeries gen_function(const FockContext& ctx, Gen g, int i);

FockMatrix vacuum_matrix(const FockContext& ctx);

// Truncation of the identity element sum_n E_{n,n}/n! to |n| <= d.  On a
// level-limited model with d >= level this is the exact identity.
FockMatrix identity_matrix(const FockContext& ctx, int d);

// Dictionary: function coefficients P (element P exp(-phi/hbar)) to matrix
// A and back.  P must have antiholomorphic support within the block unless
// `allow_projection` is set, in which case the overshoot is dropped and the
// result holds the coordinates of the projected element.
FockMatrix to_fock(const FockContext& ctx, const QSeries& P, bool allow_projection = false);
QSeries from_fock(const FockContext& ctx, const FockMatrix& A);

// Star product of two elements: C_{m,l} = sum_n A_{m,n} n! B_{n,l}.  The
// contraction needs one factor with completely-known entries along the
// contracted direction, and the other certified across its support.
FockMatrix fock_mul(const FockContext& ctx, const FockMatrix& A, const FockMatrix& B);

// Matrix of the bare generator action in the dictionary; only the
// antiholomorphic pair needs one (the holomorphic pair acts by index
// shifts).  Rows certified through fdeg, columns through the block.
FockMatrix generator_table(const FockContext& ctx, Gen g, int i);

FockMatrix apply_generator(const FockContext& ctx, const FockMatrix& A, Gen g, int i,
                           OperatorSide side);

// Independent path for the four combinations with a closed rule on the
// weight-function coefficients: left z^i (P -> z^i P), left grad
// (P -> d_i P), right conjugate coordinate (P -> zbar^i P), right conjugate
// gradient (P -> d_ibar P).
FockMatrix apply_weighted(const FockContext& ctx, const FockMatrix& A, Gen g, int i,
                          OperatorSide side);

// Left or right multiplication by an arbitrary polynomial, decomposed per
// monomial as z^m * zbar^k (holomorphic factors act pointwise from their
// side, so this ordering is the function itself).  Antiholomorphic factors
// need a column-complete operand, and from the left also operand rows
// within the block.
FockMatrix apply_function(const FockContext& ctx, const FockMatrix& A, const QSeries& f,
                          OperatorSide side);

struct WordOp {
    Gen gen;
    int var = 0;
    OperatorSide side = OperatorSide::Left;
};

FockMatrix apply_word(const FockContext& ctx, FockMatrix start, const std::vector<WordOp>& ops);

// Matrix of the conjugated element, projected to the block square; an exact
// involution for matrices supported inside it.
FockMatrix conjugate_fock(const FockContext& ctx, const FockMatrix& A);

// exp(sign * phi / hbar) as a series at the working cutoffs.
QSeries exp_weight(const FockContext& ctx, int sign);

// from_fock(identity_matrix(d)) * exp(-phi/hbar) - 1; vanishes through
// bidegree (d, d) exactly when the truncated identity is complete there.
QSeries completeness_defect(const FockContext& ctx, int d);

}  // namespace kstar
