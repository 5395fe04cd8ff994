#pragma once

#include "novarch/complexes.hpp"

namespace novarch {

// All matrices in this module act on *normalized* coordinates: the basis
// ê_i = T^{λ_i} e_i in which every generator has norm 1 and the standard
// frame is orthogonal.  Norm statements (|i| = 1, |h| ≤ e^β, ...) are read
// directly off entry valuations.  Use normalize_map/denormalize_map to move
// between raw and normalized pictures.

// Boundary depth computed from its definition: the largest valuation gap
// val(b) - sup{val(x) : d x = b} over boundaries b, maximized degree by
// degree (0 for a zero differential).  Throws PrecisionExhausted when the
// answer would sit within `slack` of the working precision.
Rat boundary_depth_def(const ReducedComplex& c, int slack = 1);
Rat boundary_depth_def(const FloerTypeComplex& c, int slack = 1);

// Boundary depth as the largest torsion exponent of the lattice barcode.
Rat boundary_depth_torsion(const ReducedComplex& c, int slack = 1);
Rat boundary_depth_torsion(const FloerTypeComplex& c, int slack = 1);

// Special deformation retract of a reduced complex onto its homology:
//   p i = id,   id - i p = d0 h + h d0,   h i = 0,   p h = 0,   h h = 0,
// with |i| = 1 (isometric onto its image), |p| ≤ 1 and |h| ≤ e^beta where
// beta is exactly the boundary depth, attained on the constructed frame.
struct SDRData {
    ReducedComplex base;
    ValuedBasis homology;   // one generator per surviving class
    NovMat i;               // homology -> base      (normalized coords)
    NovMat p;               // base -> homology
    NovMat h;               // base -> base, degree -1
    Rat beta = 0;
};

SDRData special_dr(const ReducedComplex& c);

// The perturbation of a complex relative to its leading part, in normalized
// coordinates: normalize(d) - normalize(d0).
NovMat normalized_perturbation(const FloerTypeComplex& c);

struct PerturbedSDR {
    NovMat d_def;            // induced differential on the homology carrier
    NovMat i1, p1, h1;       // perturbed structure maps (normalized coords)
    NovMat S;                // summed series (id + delta h)^{-1} delta
    Rat eps = 0;             // working margin r = e^{-eps}
    Rat beta = 0;
    ExtRat delta_shift;      // valuation shift of the perturbation
    ExtRat d_def_shift;
    int series_terms = 0;
    bool series_truncated = false;
    ExtRat precision;        // outputs are valid modulo T^precision
};

// Homological perturbation: given the retract of (C, d0) and a degree +1
// perturbation delta with |delta| strictly below e^{-beta} (equality is
// rejected with PerturbationTooLarge), sums S = Σ (-delta h)^n delta and
// transfers
//   d_def = p S i,   i1 = i - h S i,   p1 = p - p S h,   h1 = h - h S h.
// eps defaults to min(1/100, (val(delta) - beta)/7), giving the margin
// e^{6 eps + beta} < |delta|^{-1} used by the convergence bookkeeping.
PerturbedSDR perturb(const SDRData& sdr, const NovMat& delta_normalized,
                     std::optional<Rat> eps = std::nullopt);

struct SDRCheckReport {
    bool ok = true;
    std::vector<std::string> failures;
};

// Verifies, modulo the tracked precision, the five retract identities of the
// perturbed data against d = d0 + delta, plus d_def^2 = 0 and the side
// conditions h1 i1 = 0, p1 h1 = 0, h1 h1 = 0.
SDRCheckReport check_perturbed_sdr(const SDRData& sdr, const NovMat& delta_normalized,
                                   const PerturbedSDR& out);

// One-call convenience: associated_graded + special_dr + perturb on the
// complex's own two-scale split.
PerturbedSDR perturb_complex(const FloerTypeComplex& c, std::optional<Rat> eps = std::nullopt);

// The transferred complex (homology carrier, induced differential) as a
// filtered complex in raw coordinates, ready for barcode comparisons.
FloerTypeComplex perturbed_model(const SDRData& sdr, const PerturbedSDR& out);

}  // namespace novarch
