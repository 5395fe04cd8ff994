#pragma once

#include "novarch/matrix.hpp"
#include "novarch/spectral.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace novarch {

// ---------------------------------------------------------------------------
// Polyhedral side of the deformation valuation.  A relative class alpha in
// Z^m pairs with a flux vector v through the affine functional
//
//     ell_v(alpha) = w0(alpha) + <v, boundary(alpha)>,
//
// linear in v.  Classes nonnegative against every v of a polytope form a
// cone; its group-ring elements specialize to Novikov scalars at each flux
// point; the minimum of the class functionals is the concave valuation
// profile; and the cone dual to a star of flux directions decides whether
// leading deformation terms can carry nonzero boundary.
// ---------------------------------------------------------------------------

struct RelLattice {
    int m = 0;      // rank of the relative class lattice
    VecQ w0;        // action functional on classes, size m
    MatQ boundary;  // k x m integer matrix to the circle-class lattice
};

// SchemaError on size mismatch or non-integer boundary entries.
void validate_rel_lattice(const RelLattice& L);

using ClassVec = std::vector<long>;

Rat w0_of(const RelLattice& L, const ClassVec& alpha);
VecQ boundary_of(const RelLattice& L, const ClassVec& alpha);
Rat ell(const RelLattice& L, const ClassVec& alpha, const VecQ& v);

struct FluxPolytope {
    std::vector<VecQ> vertices;
    bool contains_origin = false;
};

// Builds a polytope from a nonempty, irredundant vertex list (SchemaError
// otherwise) and records whether the convex hull contains the origin.
FluxPolytope make_polytope(std::vector<VecQ> vertices);
bool point_in_polytope(const FluxPolytope& P, const VecQ& v);

// Exact membership of v in conv(points) resp. cone(rays), decided by a
// rational phase-one simplex with Bland's rule.
bool convex_membership(const std::vector<VecQ>& points, const VecQ& v);
bool conic_membership(const std::vector<VecQ>& rays, const VecQ& v);

// True iff ell_v(alpha) >= 0 at every vertex (sufficient by linearity in v).
bool cone_membership(const ClassVec& alpha, const FluxPolytope& P, const RelLattice& L);

struct ConeRingElement {
    std::map<ClassVec, Rat> terms;  // class -> coefficient, zeros dropped
};

// Validates every class against the cone (ClassOutsideCone with witness).
ConeRingElement cone_ring_element(const std::map<ClassVec, Rat>& terms,
                                  const FluxPolytope& P, const RelLattice& L);
ConeRingElement ring_add(const ConeRingElement& a, const ConeRingElement& b);
ConeRingElement ring_mul(const ConeRingElement& a, const ConeRingElement& b);

// e^{[u]} -> T^{ell_v(u)}, additive and multiplicative in the element.
// PointOutsidePolytope when v is not in the polytope.
Novikov specialize(const ConeRingElement& x, const VecQ& v, const FluxPolytope& P,
                   const RelLattice& L);

// Minimum of finitely many affine functionals; the empty piece list is the
// constant +infinity (the profile of the zero class alone).
struct PLConcaveFunction {
    std::vector<std::pair<Rat, VecQ>> pieces;  // (constant, gradient)
    FluxPolytope domain;

    ExtRat eval(const VecQ& v) const;
    int argmin_piece(const VecQ& v) const;  // first attaining index, -1 if none
};

// One piece per nonzero class (the zero class contributes no constraint);
// every class must pass cone_membership (ClassOutsideCone).
PLConcaveFunction tau_eval(const std::vector<ClassVec>& classes, const FluxPolytope& P,
                           const RelLattice& L);

// A star of flux directions: segments [0, p], rays [0, inf) * r, and full
// lines R * f (both signs imposed -- the exact consequence of a line in the
// star, usable even when the line itself has no rational presentation).
struct StarShape {
    std::vector<VecQ> points;
    std::vector<VecQ> rays;
    std::vector<VecQ> full_lines;
};

StarShape star_of(const FluxPolytope& P);

struct DualCone {
    std::vector<VecQ> generators;     // conic generating set in Q^m
    bool boundary_vanishes = false;   // boundary(g) = 0 for every generator
};

// Rows a of the system {beta : a . beta >= 0 for every row}: the base action
// row plus one row per star datum (two for a full line).
MatQ dual_cone_inequalities(const RelLattice& L, const StarShape& star);

// Generators by exact double description over the rationals; the list is
// pruned to a minimal generating set in a deterministic order.
// DimensionTooLarge when m > 8.
DualCone dual_cone(const RelLattice& L, const StarShape& star);

struct MonotonicityResult {
    ExtRat tau1, tau2;
    bool holds = false;  // tau1 <= tau2
};

// Checks the valuation comparison along a page-one map from the second state
// to the first (the restriction direction).  The map must respect the theta
// lattices (SchemaError) and be injective on residues (MapNotInjective);
// valuations come from the states' pages (Inconclusive propagates).
MonotonicityResult check_monotonicity(const SpectralSequenceState& s1,
                                      const SpectralSequenceState& s2,
                                      const NovMat& page_one_map);

}  // namespace novarch
