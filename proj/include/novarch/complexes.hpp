#pragma once

#include "novarch/linalg.hpp"
#include "novarch/snf.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace novarch {

// A filtered complex of Floer type: a free graded Lambda-module with a
// distinguished basis, an action valuation per generator, a differential that
// does not increase the action norm, and a two-scale structure
//
//   d = d0 + T^hbar * d1   (in relative-normalized coordinates)
//
// where the relative valuations record the position of each generator inside
// its local filtration step.  `d` is stored in raw basis coordinates; the
// normalized views are derived.
struct FloerTypeComplex {
    ValuedBasis basis;                    // action valuations per generator
    NovMat d;                             // raw differential, deg +1 columns->rows
    Rat hbar = 0;                         // scale gap between d0 and d1
    std::vector<Rat> relative_valuation;  // one entry per generator
    std::vector<std::uint8_t> outside;    // locality flag per generator
    ExtRat precision = ExtRat::infinity();

    int size() const { return static_cast<int>(basis.gens.size()); }

    // d conjugated by T^{relative_valuation}: entry (j,i) becomes
    // T^{rel_j - rel_i} d(j,i).  Exponents must lie in {0} u [hbar, inf).
    NovMat d_theta() const;
    // d conjugated by T^{action valuation}: all entries have valuation >= 0
    // exactly when the differential is norm non-increasing.
    NovMat d_norm() const;

    // Exponent-zero coefficients of d_theta (the ground-field leading part).
    MatQ split_d0() const;
    // (d_theta - d0) / T^hbar, exponents >= 0.
    NovMat split_d1() const;

    // Residual valuations val - relative_valuation (the norm data carried by
    // the reduced complex).
    std::vector<Rat> residual_valuations() const;
};

// The reduced complex over the interval ring: ground-field differential d0,
// generator norms given by residual valuations, and the interval length hbar.
struct ReducedComplex {
    ValuedBasis basis;  // valuations = residual valuations of the source
    MatQ d0;
    Rat hbar = 0;
    std::vector<std::uint8_t> outside;
    ExtRat precision = ExtRat::infinity();

    int size() const { return static_cast<int>(basis.gens.size()); }
    NovMat d0_nov() const;  // d0 with Novikov entries
    NovMat d0_norm() const; // d0_nov conjugated by T^{valuation}
};

struct ValidationIssue {
    std::string condition;  // short machine-readable tag
    std::string witness;    // human-readable witness (entry, generator, ...)
};

struct ValidationReport {
    bool valid = true;
    std::vector<ValidationIssue> issues;
    // Smallest positive exponent appearing in the theta-normalized matrix
    // (the observed scale gap); empty when d1 = 0.
    std::optional<Rat> observed_gap;

    void fail(std::string condition, std::string witness);
};

// Checks: unique nonempty names, grading (deg +1, mod 2 when z2), norm
// non-increase, theta-exponents in {0} u [hbar, inf), d^2 = 0 within
// precision, vector sizes coherent.  Collects all violations.
ValidationReport validate_floer_type(const FloerTypeComplex& c);

// Throws the matching error (SchemaError / GradingMismatch / InvariantError /
// NotAComplex) on the first reported issue; no-op for valid complexes.
void require_valid(const FloerTypeComplex& c);

// Per-degree block data of a graded differential in normalized coordinates.
struct DegreeBlocks {
    std::map<int, std::vector<int>> idx;  // degree -> generator indices
    std::map<int, int> dims;
    std::map<int, NovMat> dmat;           // block C_k -> C_{k+1}
    bool z2 = false;

    int dim(int k) const;
    const NovMat* block(int k) const;  // nullptr when absent/empty
};

// Splits a (normalized) differential into degree blocks.  Throws
// GradingMismatch when a nonzero entry connects degrees other than k -> k+1
// (mod 2 when z2).
DegreeBlocks degree_blocks(const ValuedBasis& basis, const NovMat& normalized_d);

// Lattice homology barcode of the action-normalized differential.
TorsionBarcode homology_barcode(const FloerTypeComplex& c, int slack = 1);
TorsionBarcode homology_barcode(const ReducedComplex& c, int slack = 1);

// One stage of a telescope: a complex together with the comparison map kappa
// to the next stage (raw coordinates of the next stage's basis; ignored for
// the last stage).
struct TelescopeStage {
    FloerTypeComplex complex;
    NovMat kappa;  // stage n -> stage n+1, degree 0
};

// Provenance of a telescope generator.
struct TelescopeOrigin {
    int stage = 0;
    int index = 0;      // generator index inside the stage
    bool cone = false;  // true for the shifted q-copies
};

struct Telescope {
    FloerTypeComplex complex;
    std::vector<TelescopeOrigin> origin;
};

// Mapping telescope of a finite ray C_0 -> C_1 -> ... -> C_{m-1}: the direct
// sum of all stages plus a shifted copy q.C_n for each comparison map, with
//   delta(q.a) = q.(d a) + (-1)^{deg a} (kappa a - a).
// A single stage telescopes to itself.  Stage maps must be degree-0 chain
// maps (NotChainMap) between complexes with equal hbar-compatible structure.
Telescope build_telescope(const std::vector<TelescopeStage>& stages);

// The associated reduced complex: forgets d1, keeps residual valuations.
ReducedComplex associated_graded(const FloerTypeComplex& c);

// Removes the generators flagged `outside`.  The flagged block must be a
// subcomplex (NotSubcomplex) and strictly acyclic as a lattice complex: no
// free classes and no torsion at all (NotAcyclic).  The returned complex is
// the quotient by that block; its barcode equals the input's.
ReducedComplex quotient_outside(const ReducedComplex& c);

}  // namespace novarch
