#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "novarch/errors.hpp"
#include "novarch/matrix.hpp"

namespace novarch {

// Constructive rigidity for truncated affinoid carriers: when a second
// commutative product * is multiplicatively close to the reference product,
// the monomial basis deforms to an isometric algebra isomorphism between the
// two structures, built by star-multiplying generators and by ultrametric
// fixed-point solves.  Norms are e^{-valuation} throughout, so closeness
// constants c = e^{-g} are handled additively as valuation gaps g:
// |x*y - xy| < c·|xy| on the basis means val(x*y - xy) - val(xy) > g.
//
// The second half of the module rectifies almost-commuting squares of
// isometries and almost-natural transformations over finite posets.

// Monomial key: one exponent per generator slot.  Power-series and
// inverted-element carriers use nonnegative exponents; annulus factors use one
// signed slot per factor (positive powers of the first edge generator,
// negative powers of the second).
using MKey = std::vector<int>;

// Element in the orthonormal monomial basis: key -> nonzero coefficient.
using AlgElem = std::map<MKey, Novikov>;

int key_degree(const MKey& k);                       // Σ |k_i|
std::string key_str(const MKey& k);
std::string elem_str(const AlgElem& x);

bool elem_is_zero(const AlgElem& x);
ExtRat elem_val(const AlgElem& x);                   // min coefficient valuation
AlgElem elem_add(AlgElem x, const AlgElem& y);
AlgElem elem_sub(AlgElem x, const AlgElem& y);
AlgElem elem_scale(const Novikov& c, const AlgElem& x);
// val(x - y) >= prec, i.e. equality mod T^prec.
bool elem_congruent(const AlgElem& x, const AlgElem& y, const Rat& prec);

enum class ModelKind { PowerSeries, Polyannulus, Inverted };

// A finite-rank slice of an affinoid algebra: the free module on all monomial
// keys of total degree <= degree, with the reference product truncated by
// dropping keys that leave the range.  Every basis monomial has norm 1 in its
// carrier convention (the inverted-element carrier stores u-powers as explicit
// elements of valuation j·r instead; see laurent_model).
struct AffinoidModel {
    ModelKind kind = ModelKind::PowerSeries;
    int vars = 0;        // key length
    int degree = 0;      // truncation: total key degree bound
    Rat precision;       // working modulus T^precision for solvers and checks
    std::vector<MKey> basis;                  // graded-lexicographic order

    // Polyannulus data: factor radii (r1, r2) and the relation exponents
    // g_j = r1 + r2 per factor (first·second edge generator = T^{g_j}).
    std::vector<std::pair<Rat, Rat>> radii;
    std::vector<Rat> gaps;

    // Inverted-element data: u is pinned by u*f = T^r with f of norm 1 and
    // invertible constant term; the reference solution is T^r·f^{-1}.
    AlgElem f;
    Rat r = Rat(0);

    int dim() const { return static_cast<int>(basis.size()); }
    int index_of(const MKey& k) const;        // -1 if absent
};

// Truncated power-series algebra on `vars` generators of norm 1.
AffinoidModel tate_model(int vars, int degree);
// Product of annuli; one signed key slot per factor.
AffinoidModel polyannulus_model(const std::vector<std::pair<Rat, Rat>>& radii,
                                int degree);
// Power-series carrier together with an inverted element f (norm 1, constant
// term of valuation 0) and inversion depth r > 0.
AffinoidModel laurent_model(int vars, int degree, const AlgElem& f, const Rat& r);

AlgElem elem_one(const AffinoidModel& a);
AlgElem elem_monomial(const AffinoidModel& a, const MKey& k,
                      const Novikov& c = Novikov(1));
// Reference product (bilinear, truncated to the key range).
AlgElem ref_mul(const AffinoidModel& a, const AlgElem& x, const AlgElem& y);
AlgElem ref_pow(const AffinoidModel& a, const AlgElem& x, int k);

// A commutative product given as an explicit bilinear table on basis keys.
// Pairs whose reference product is zero must star to zero (the closeness
// inequality forces it) and are stored implicitly.
struct ProductPerturbation {
    // Keyed by (min, max) of the two basis keys in lexicographic order.
    std::map<std::pair<MKey, MKey>, AlgElem> table;
    // Measured closeness gap: min over basis pairs with nonzero reference
    // product of val(a*b - ab) - val(ab); infinity when star == reference.
    ExtRat gap = ExtRat::infinity();
    // Max key-degree overshoot of any visible table term over the degree of
    // its pair sum; bounds how far one star step can push support outward.
    int spread = 0;

    const AlgElem& entry(const MKey& a, const MKey& b) const;  // zero if absent
};

// Validates commutativity (symmetric table), associativity on all key triples
// whose total degree stays within the carrier (mod T^precision), and the
// closeness inequality.  Throws SchemaError for malformed or non-associative
// tables, NotClose when the measured gap is not positive (c >= 1) or a
// reference-zero pair stars to a nonzero value.
ProductPerturbation perturbation_from_table(
    const AffinoidModel& a, std::map<std::pair<MKey, MKey>, AlgElem> table);

// star == reference (gap = infinity).
ProductPerturbation reference_perturbation(const AffinoidModel& a);
// x*y = xy·w for a central unit w with val(w - 1) > 0; gap = val(w - 1).
ProductPerturbation scaled_perturbation(const AffinoidModel& a, const AlgElem& w);
// x*y = ψ^{-1}(ψ(x)·ψ(y)) for ψ = id + η, where η maps basis keys to
// elements of positive valuation.
ProductPerturbation conjugated_perturbation(const AffinoidModel& a,
                                            const std::map<MKey, AlgElem>& eta);

// Bilinear extension of the star table.  On annulus-product carriers the key
// range is not an ideal: a product step whose support could cross the degree
// bound discards terms that a later factor of opposite sign would have pulled
// back into range.  When `lossy` is given it is set on any such step with a
// visible coefficient; quotient carriers (power series, inverted element)
// never set it.
AlgElem star_mul(const AffinoidModel& a, const ProductPerturbation& p,
                 const AlgElem& x, const AlgElem& y, bool* lossy = nullptr);

// Solve a*x = target by successive correction x += inv_ref·(target - a*x),
// where inv_ref is an exact reference-product inverse of a.  The defect
// valuation rises by at least gap - val(inv_ref) per step; iteration stops
// once the correction inv_ref·defect vanishes mod T^precision, so the
// returned x is pinned modulo the working precision.  Appends the defect
// valuation after each step to *trace when given.  Throws IterationStalled
// if the defect valuation ever fails to increase strictly.
AlgElem star_solve(const AffinoidModel& a, const ProductPerturbation& p,
                   const AlgElem& lhs, const AlgElem& inv_ref,
                   const AlgElem& target, std::vector<ExtRat>* trace = nullptr);

// Unit of the star product, solved from 1*e = 1.
AlgElem star_unit(const AffinoidModel& a, const ProductPerturbation& p,
                  std::vector<ExtRat>* trace = nullptr);

// One basis-indexed isomorphism table with its check ledger.  `keys` lists the
// mapped basis: carrier keys for the power-series and polyannulus cases, and
// (exponent vector, inverted-power) keys of length vars+1 for the
// inverted-element case.  reference[i] is the source basis element the key
// names, images[i] its star-side image.
struct IsoReport {
    std::vector<MKey> keys;
    std::vector<AlgElem> reference;
    std::vector<AlgElem> images;
    ExtRat gap = ExtRat::infinity();        // perturbation closeness gap
    ExtRat id_margin = ExtRat::infinity();  // min val(φ(b) - b) - val(b)
    bool norm_preserving = false;           // val(φ(b)) == val(b) on every key
    bool multiplicative = false;  // φ(b·b') ≡ φ(b)*φ(b') mod T^precision
    int pairs_checked = 0;        // pairs covered by the multiplicativity sweep
    // Pairs excluded from the sweep because a truncation-lossy star evaluation
    // makes the comparison meaningless there (annulus-product carriers only;
    // quotient carriers never skip).
    int pairs_skipped = 0;
    // Solver outputs by name ("unit", "w2[j]", "u") with per-step defect
    // valuations for each solve.
    std::map<std::string, AlgElem> solved;
    std::map<std::string, std::vector<ExtRat>> defect_traces;
};

// Monomial basis map x^I ↦ x^{*I} (star powers, empty product = star unit).
// Requires a positive closeness gap (c < 1).
IsoReport rigidity_iso_tate(const AffinoidModel& a, const ProductPerturbation& p);
// Single-factor polyannulus; requires exactly one factor.  The second edge
// generator is replaced by the solution w2 of z1*w2 = T^{r1+r2}·e, e the
// star unit; requires gap > r1 + r2 strictly.
IsoReport rigidity_iso_annulus(const AffinoidModel& a, const ProductPerturbation& p);
// Factor-wise annulus solves; requires gap > max_j (r_{j,1} + r_{j,2}).
IsoReport rigidity_iso_polyannulus(const AffinoidModel& a,
                                   const ProductPerturbation& p);
// Solves u from u*f = T^r and maps (I, j) ↦ x^{*I} * u^{*j}; requires
// gap > r.  The reference side pairs (I, j) with x^I·(T^r f^{-1})^j.
IsoReport rigidity_iso_laurent(const AffinoidModel& a, const ProductPerturbation& p);

// --- rectification of almost-commuting squares ------------------------------

struct RectifiedMap {
    NovMat map;  // g̃ with g̃·h0 = h1·f exactly
    // val(g·h0 - h1·f) - val(g·h0) before rectification; infinity if exact.
    ExtRat commutation_defect = ExtRat::infinity();
    // val(g̃ - g) - val(g); infinity when unchanged.  Positive by construction.
    ExtRat deviation = ExtRat::infinity();
};

// Given isometries f: V0 -> W0, g: V1 -> W1 and connecting maps h0: V0 -> V1
// (injective with spanning image, hence invertible) and h1: W0 -> W1 with
// val(g·h0 - h1·f) > val(g·h0), returns the unique g̃ = h1·f·h0^{-1} agreeing
// with g up to terms of strictly smaller norm.  Throws SchemaError (shapes,
// isometry failures), MapNotInjective / ImageNotSpanning (h0), and
// NotAlmostCommutative (defect not strictly below |g·h0|).
RectifiedMap rectify_map(const NovMat& f, const NovMat& g, const NovMat& h0,
                         const NovMat& h1);

// A transformation between two diagrams of the same shape over a finite poset.
// Strictly comparable pairs (i, j), i < j in the order, key both map tables;
// the relation must be transitively closed and both diagrams functorial.
struct DiagramSpec {
    int objects = 0;
    std::map<std::pair<int, int>, NovMat> source_maps;  // h_ij
    std::map<std::pair<int, int>, NovMat> target_maps;  // k_ij
    std::vector<NovMat> transformation;                 // f_i per object
};

struct RectifiedTransformation {
    int initial = -1;
    std::vector<NovMat> maps;        // f̃_i; f̃_initial = f_initial
    std::vector<ExtRat> deviations;  // val(f̃_i - f_i) - val(f_i)
};

// Rectifies every component from the initial object: f̃_i is the rectified map
// of the square (f_initial, f_i, h_{0i}, k_{0i}), after which every square of
// the poset commutes exactly.  Throws NoInitialObject when no object precedes
// all others, SchemaError for malformed or non-functorial diagrams, and
// propagates rectify_map errors.
RectifiedTransformation rectify_natural_transformation(const DiagramSpec& d);

} // namespace novarch
