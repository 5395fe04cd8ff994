#pragma once

#include <map>
#include <vector>

#include "novarch/matrix.hpp"

namespace novarch {

// Smith normal form over the valuation ring Λ_{≥0}:
//   U · M · V = diag(T^{e_1}, …, T^{e_r}, 0, …)   with 0 ≤ e_1 ≤ … ≤ e_r,
// U, V invertible over Λ_{≥0} (inverses returned).  Pivoting rule: globally
// minimal valuation, ties broken by lowest (row, col).  Entries with no
// visible terms are treated as exact zeros; a visible candidate pivot whose
// valuation is within `slack` of the matrix precision floor raises
// PrecisionExhausted (such an exponent is indistinguishable from ∞).
struct SNFResult {
    NovMat U, Uinv, V, Vinv;
    std::vector<Rat> exponents;   // nondecreasing torsion/scaling exponents
    int rank = 0;                 // = exponents.size()
    int zero_rank = 0;            // min(rows, cols) - rank
};

SNFResult smith_normal_form(const NovMat& m, const Rat& slack = Rat(1));

// Diagonal matrix U*M*V reconstructed from the result (for verification).
NovMat snf_diagonal(const SNFResult& s, Eigen::Index rows, Eigen::Index cols);

// Membership of v in the Λ_{≥0}-column span of M, decided through a
// precomputed SNF of M:  v ∈ M·Λ_{≥0}^n  ⟺  (U v)_i ∈ T^{e_i}Λ_{≥0} for
// i < rank and (U v)_i ≡ 0 beyond.
bool snf_image_contains(const SNFResult& s, const NovVec& v);

// Per-degree homology barcode of a complex of free Λ_{≥0}-modules: torsion
// exponents (> 0, within precision-slack) and free rank of ker/im.
struct TorsionBarcode {
    std::map<int, std::vector<Rat>> torsion;   // sorted ascending per degree
    std::map<int, int> free_rank;

    Rat max_torsion() const;                   // 0 when torsion-free
    bool operator==(const TorsionBarcode& o) const {
        return torsion == o.torsion && free_rank == o.free_rank;
    }
};

// dmats[k] is the matrix of d : C_k → C_{k+1} in normalized bases (entries of
// valuation ≥ 0); dims[k] the rank of C_k.  Degrees with no outgoing map get
// d = 0.  With z2 set, degrees are {0,1} and the maps wrap around.
TorsionBarcode homology_barcode_raw(const std::map<int, NovMat>& dmats,
                                    const std::map<int, int>& dims,
                                    bool z2 = false, const Rat& slack = Rat(1));

} // namespace novarch
