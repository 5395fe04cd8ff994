#pragma once

#include "novarch/complexes.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace novarch {

// ---------------------------------------------------------------------------
// Spectral sequence of the shifted filtration F^p = T^{p hbar} L, where L is
// the lattice spanned by the relative-normalized basis (the frame of d_theta).
// The filtration is T^{hbar}-periodic in p, so only the p = 0 slice is stored:
// E_r^{p,k} = T^{p hbar} * (slice at degree k).
//
// Pages are presented as quotients Z/W of explicit lattices.  Because
// T^{hbar} Z always lies in W, every presentation exponent is <= hbar, and the
// invariants split as
//   * interval_rank: summands with annihilator exactly T^{hbar} — free of rank
//     one over the length-hbar interval ring (one per surviving class);
//   * partial: annihilator exponents strictly inside (0, hbar) — classes alive
//     on only part of the interval (they appear while a fractional-valuation
//     differential straddles two lattice levels).
// ---------------------------------------------------------------------------

struct PageBlock {
    int interval_rank = 0;
    std::vector<Rat> partial;  // ascending, in (0, hbar)

    int dim() const { return interval_rank + static_cast<int>(partial.size()); }
    bool trivial() const { return interval_rank == 0 && partial.empty(); }
    bool operator==(const PageBlock& o) const {
        return interval_rank == o.interval_rank && partial == o.partial;
    }
};

// The lattice-level differential d_h : E_h^{0,k} -> E_h^{h,k+1} (filtration
// hop h).  `val` is the drop min over presentation generators of
// val(class of d x) - val(class of x); `page` places that drop on the page
// whose window [(i-1)hbar, i hbar) contains it — the index the tau
// characterization counts, one above the hop for a plain lattice kill.
struct PageDifferential {
    int hop = 0;
    bool nonzero = false;
    ExtRat val = ExtRat::infinity();
    std::optional<int> page;                  // floor(val/hbar) + 1 when nonzero
    std::map<int, NovMat> blocks;             // degree -> presentation coords
};

struct SpectralSequenceState {
    FloerTypeComplex source;
    Rat hbar = 0;
    int r_max = 0;
    std::vector<std::map<int, PageBlock>> pages;       // pages[r-1][k] = E_r^{0,k}
    std::vector<PageDifferential> differentials;       // differentials[h-1] = d_h

    // Smallest hop from which every differential is provably zero: all
    // congruence exponents of the filtered differential are <= (hop-1)*hbar,
    // so any image lattice already lies in the boundary lattice.
    int certificate_hop = 1;
    bool certified_complete = false;  // certificate_hop <= r_max + 1

    std::optional<int> first_nonzero_page;    // window index of the first kill
    std::optional<ExtRat> tau;                // set when determined

    const PageBlock& block(int r, int k) const;        // zero block if absent
    bool collapsed_at_one() const;                     // no nonzero d_h anywhere
};

// Computes pages 1..r_max and differentials of hop 1..r_max.  Page 1 is the
// homology of the associated graded tensored with interval pieces; every
// later page is the homology of its predecessor.  Requires r_max >= 1
// (SchemaError), a valid complex (InvariantError), and r_max * hbar below
// the precision when the latter is finite (PrecisionExhausted).
SpectralSequenceState compute_pages(const FloerTypeComplex& c, int r_max);

// Horizon past which the certificate closes the computation:
// max(1, smallest h with all congruence exponents <= (h-1)*hbar).
int suggested_r_max(const FloerTypeComplex& c);

// Valuation of the first nonzero differential; +infinity when none was found
// and the certificate covers all remaining hops.  Throws Inconclusive when
// neither holds within the computed horizon.
ExtRat tau_from_ss(const SpectralSequenceState& s);

// ---------------------------------------------------------------------------
// Non-Hausdorff diagnostic over a nested family of truncations.
// ---------------------------------------------------------------------------

// One truncation of the family: the complex plus the relative lattice used
// for the theta-side trace (for the projective-line family, the geometric
// lattice in which every column reads e_i + T e_{i+2}).
struct FamilyMember {
    FloerTypeComplex complex;
    std::vector<Rat> theta_lattice;
};

enum class ClassFate { Bounded, Dying, Diverges };

std::string fate_name(ClassFate f);

// For one tracked generator class:
//   action_trace[n] = best action valuation of a representative at size n
//   theta_trace[n]  = best relative-lattice valuation of a representative
// A class survives when the action trace is constant, dies when it grows, and
// its lattice trace "grows" when strictly increasing up to at least the
// threshold.  Surviving + growing = the filtration on homology separates no
// longer: Diverges.
struct ClassTrace {
    std::string generator;
    std::vector<ExtRat> action_trace;
    std::vector<ExtRat> theta_trace;
    bool surviving = false;
    bool growing = false;
    ClassFate fate = ClassFate::Bounded;
};

struct HausdorffDiagnostic {
    std::vector<int> sizes;
    std::vector<ClassTrace> classes;
    bool diverges = false;
    int certified_rank = 0;  // tracked classes with constant action trace
};

// The family callback must produce nested truncations (member at sizes[i]
// embeds in member at sizes[i+1]); this is assumed, not checked.  `tracked`
// lists generator names that must exist in every member.
HausdorffDiagnostic detect_hausdorff_failure(
    const std::function<FamilyMember(int)>& family, const std::vector<int>& sizes,
    const std::vector<std::string>& tracked, const Rat& threshold = Rat(2));

// ---------------------------------------------------------------------------
// Combinatorial check of the stated convergence hypotheses on user-supplied
// orbit tables (no geometry is derived).
// ---------------------------------------------------------------------------

struct OrbitDatum {
    std::string name;
    Rat action = 0;
    long cz_index = 0;
};

struct ConvergenceCheck {
    bool proportional_case = false;   // kappa != 0 and indices inside the window
    bool index_bounded_case = false;  // kappa == 0 and action <= slope*|index| + offset
    bool converges = false;
    std::string witness;              // first orbit violating the active bound
};

// kappa: the proportionality constant relating the relative first Chern class
// to the relative symplectic class (absent = not proportional).  The window
// bounds indices for the kappa != 0 case; slope/offset bound action by index
// for the kappa == 0 case.
ConvergenceCheck check_convergence_hypotheses(
    const std::vector<OrbitDatum>& orbits, const std::optional<Rat>& kappa,
    const std::optional<std::pair<long, long>>& index_window,
    const std::optional<std::pair<Rat, Rat>>& slope_offset);

}  // namespace novarch
