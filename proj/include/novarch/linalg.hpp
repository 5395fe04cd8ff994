#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "novarch/matrix.hpp"

namespace novarch {

// --- valued bases -----------------------------------------------------------

struct Generator {
    std::string name;
    int degree = 0;
    Rat valuation = Rat(0);   // |e| = e^{-valuation}
};

struct ValuedBasis {
    std::vector<Generator> gens;
    bool z2_graded = false;   // degrees read modulo 2 when set

    int size() const { return static_cast<int>(gens.size()); }
    int index_of(const std::string& name) const;            // -1 if absent
    std::vector<Rat> valuations() const;
    void validate() const;                                  // unique names
};

// --- greedy echelon reduction ----------------------------------------------
//
// Column reduction by globally-minimal-valuation pivoting (ties: lowest row,
// then lowest column).  Columns are processed one pivot at a time; each new
// pivot's row is eliminated from all columns not yet carrying a pivot, never
// from finished ones.  Consequences (all exact):
//   * nonzero reduced columns are mutually orthogonal: |Σ a_j v_j| = max |a_j||v_j|;
//   * each nonzero column attains its minimal valuation at its pivot row,
//     and every later-processed column vanishes at that row;
//   * with no fixed columns, multipliers have valuation ≥ 0, so the recorded
//     transform E is unimodular over the valuation ring: the columns of R and
//     of M generate the same Λ_{≥0}-lattice.
struct Reduction {
    NovMat R;                     // reduced columns; R = M · E
    NovMat E;                     // column transform (identity on fixed columns)
    std::vector<int> pivot_row;   // per column; -1 for columns reduced to zero
    std::vector<int> order;       // column indices in pivot-processing order

    std::vector<int> zero_cols() const;
    std::vector<int> nonzero_cols() const;
};

struct ReduceOpts {
    // Leading columns already echelon-reduced (in their given order) with these
    // pivot rows; they are left untouched and their pivot rows are eliminated
    // from the free columns first.
    int fixed_cols = 0;
    std::vector<int> fixed_pivots;
    // Optional pivot-row mask for the free columns (size = rows).
    const std::vector<std::uint8_t>* allowed_rows = nullptr;
};

Reduction greedy_reduce(const NovMat& m, const ReduceOpts& opts = {});

// Exact coordinates of v in the reduced columns of `red`, by sequential pivot-
// row reading in processing order.  Returns (coords over all columns, residual);
// the residual vanishes on every pivot row and has minimal norm in v + span,
// so val(residual) = sup_{w ∈ span} val(v − w).
std::pair<NovVec, NovVec> echelon_coords(const Reduction& red, const NovVec& v);

// Solve-in-span helper caching one reduction of the given columns.
class SpanSolver {
public:
    explicit SpanSolver(const NovMat& cols);
    // coords c with cols·c = v exactly, plus the minimal-norm residual.
    std::pair<NovVec, NovVec> coords(const NovVec& v) const;
    ExtRat dist_val(const NovVec& v) const;       // val of minimal residual
    bool contains(const NovVec& v) const;         // residual ≡ 0 (mod precision)
    const Reduction& reduction() const { return red_; }
    int rank() const;

private:
    NovMat cols_;
    Reduction red_;
};

// Distance (as a valuation: sup val(v - w)) from v to the Λ_{≥0}-lattice
// generated by the columns of `gens`.
ExtRat dist_val_to_lattice(const NovMat& gens, const NovVec& v);
// Membership in the lattice: v = gens·c with all coords in Λ_{≥0}.
bool lattice_contains(const NovMat& gens, const NovVec& v);

// --- operator norms ---------------------------------------------------------

// |f|_∞ = max over source generators of |f(e)|/|e| and the valuation shift
// val(f) = min over columns of (val(f e) − val(e)), computed in the normalized
// bases (exact because normalized standard bases are orthogonal).
struct OpNorm {
    double norm = 0.0;            // e^{-shift}; 0 for the zero map
    ExtRat shift = ExtRat::infinity();
};
OpNorm operator_norm_val(const NovMat& f, const ValuedBasis& target, const ValuedBasis& source);
// Same on an already-normalized matrix.
OpNorm operator_norm_val_normalized(const NovMat& fhat);

// --- r-orthogonal complements ----------------------------------------------

// Complement of span(subspace columns) spanned by standard basis vectors at
// the non-pivot rows of the greedy reduction; r = e^{-eps}.  The decomposition
// V = W ⊕ C satisfies |v| > e^{-eps}·max(|π_W v|, |π_C v|) for all v ≠ 0 and
// every eps > 0 (finite rank makes the complement exactly orthogonal to W in
// the valuation sense captured by the echelon pivots).
struct RComplement {
    std::vector<int> complement_rows;   // indices of the chosen basis vectors
    NovMat basis;                       // those standard basis vectors as columns
    Reduction subspace_red;             // reduction of the input columns
};
RComplement r_orthogonal_complement(const NovMat& subspace, int ambient_dim);

// Exact check of the r-inequality for one vector: with the decomposition
// v = w + c given by the complement, val(v) < min(val w, val c) + eps.
bool r_inequality_holds(const RComplement& comp, const NovVec& v, const Rat& eps);

} // namespace novarch
