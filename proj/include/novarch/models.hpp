#pragma once

#include "novarch/complexes.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace novarch {

// --- the two-term model family ---------------------------------------------

// A one-parameter family of Z/2-graded complexes: even generators x^0..x^N
// (named "x{i}"), odd generators x^i dx for i <= N-2 (named "x{i}dx"), all
// action valuations zero, and
//
//   d(x^i dx) = T^r x^i + T^{1-r} x^{i+2}.
//
// Placing each odd generator at relative valuation min(r, 1-r) makes the
// theta-normalized differential have exponents {0, |1-2r|}, so the family is
// two-scale with hbar = |1 - 2r|.  At r = 1/2 the two terms share a scale;
// we keep hbar = 1/2 and the entry-position split below, which then sits
// exactly on the perturbation-rejection boundary.
struct CP1Model {
    Rat r;
    int N = 0;
    FloerTypeComplex complex;

    // Entry-position split of the raw differential: the x^i-target entries
    // versus the x^{i+2}-target entries of each column d(x^i dx).
    NovMat d0_part, delta_part;

    // Relative valuations (i*r for x^i, (i+1)*r for x^i dx) in which the
    // differential takes the unit-leading staircase form  d z^i = y^i +
    // T y^{i+2}  uniformly in r.
    std::vector<Rat> diagnostic_rel;
};

// Requires 0 < r < 1 and N >= 4 (SchemaError otherwise).  The returned
// complex is validated.
CP1Model cp1_model(const Rat& r, int N, const ExtRat& precision = ExtRat::infinity());

// --- polyvector fields on a polyannulus ------------------------------------

// Monomial z^a theta_S: integer exponent vector a and an ascending wedge of
// the log derivations theta_i = z_i d/dz_i over the set bits of `mask`.
struct PolyKey {
    std::vector<long> a;
    unsigned mask = 0;

    int degree() const;  // polyvector degree = popcount(mask)
    bool operator==(const PolyKey& o) const { return mask == o.mask && a == o.a; }
    bool operator<(const PolyKey& o) const {
        return mask != o.mask ? mask < o.mask : a < o.a;
    }
};

// Finite sums of monomials with Novikov coefficients.  Zero coefficients are
// never stored.  The same container holds 1-forms in the dlog basis: a key
// (a, bit i) then reads  z^a dlog z_i.
using Polyvector = std::map<PolyKey, Novikov>;

// The graded-commutative algebra of polyvector fields on the symmetric
// polyannulus  |log|z_i|| <= rho_i, with the divergence operator of the
// canonical volume form  dz_1 ^ ... ^ dz_n / (z_1 ... z_n).  In the
// log-derivation basis the divergence acts monomial-wise:
//
//   delta(z^a theta_{i_1} ^ ... ^ theta_{i_p})
//       = sum_k (-1)^{k+1} a_{i_k} z^a theta_{...without i_k...}.
//
// N bounds the exponent box |a_i| <= N used for carrier enumeration and the
// construction-time checks; the operations themselves are exact and do not
// truncate.
struct PolyvectorBV {
    int n = 1;
    std::vector<Rat> log_radii;  // rho_i >= 0 per factor
    int N = 0;

    // Valuation of a monomial: -sum |a_i| rho_i  (norm e^{-val} over the box).
    Rat key_val(const PolyKey& k) const;
    // Valuation lower bound of a finite sum; +inf for zero.
    ExtRat valuation(const Polyvector& x) const;

    Polyvector delta(const Polyvector& x) const;  // the divergence operator
    Polyvector product(const Polyvector& x, const Polyvector& y) const;
    // The failure of delta to be a derivation:
    //   {x,y} = delta(xy) - delta(x)y - (-1)^{|x|} x delta(y),
    // extended bilinearly from homogeneous degrees.  This is the Schouten
    // bracket: it satisfies graded Leibniz and Jacobi identities and restricts
    // to the Lie bracket and derivation action in low degree.
    Polyvector bracket(const Polyvector& x, const Polyvector& y) const;

    // All monomials with |a_i| <= N (and any theta-wedge), enumeration order
    // fixed by PolyKey ordering.
    std::vector<PolyKey> carrier() const;
};

// Builds the model and verifies its structural identities on the carrier
// (delta^2 = 0, delta kills functions and lowers degree by one, delta is
// bounded of norm <= 1); exhaustively up to ~20000 monomials, sampled above.
// Requires n >= 1, N >= 1, radii nonnegative of length n (SchemaError).
PolyvectorBV polyannulus_bv(int n, const std::vector<Rat>& radii, int N);

// Helpers shared by the tests and the log-form solver.
Polyvector poly_monomial(const PolyKey& k, const Novikov& c);
Polyvector poly_add(const Polyvector& x, const Polyvector& y);
Polyvector poly_sub(const Polyvector& x, const Polyvector& y);
Polyvector poly_scale(const Polyvector& x, const Novikov& c);
bool poly_is_zero(const Polyvector& x);

// --- the polyderivation map ------------------------------------------------

// <Upsilon(v), x_1, ..., x_k> by the defining recursion: identity for k = 0,
// otherwise <Upsilon({v, x_1}), x_2, ..., x_k>.  The arguments must be
// degree-0 elements; v of polyvector degree k pairs with k arguments.
Polyvector upsilon_eval(const PolyvectorBV& B, const Polyvector& v,
                        const std::vector<Polyvector>& args);

struct GerstenhaberReport {
    bool ok = true;
    std::vector<std::string> failures;
    int samples = 0;
};

// Samples monomials and checks that upsilon_eval is a derivation in each
// slot, alternating under slot swaps, and intertwines wedge and bracket with
// the determinant pairing and the derivation commutator.
GerstenhaberReport upsilon_report(const PolyvectorBV& B, std::uint64_t seed,
                                  int samples = 25);

// --- exact potentials for closed log 1-forms -------------------------------

// Exterior derivative of a function h = sum h_a z^a, written in the dlog
// basis:  d(z^a) = z^a sum_i a_i dlog z_i.
Polyvector logform_d(const PolyvectorBV& B, const Polyvector& h);

struct LogFormSolution {
    Polyvector h;            // potential with zero constant term
    Polyvector obstruction;  // the exponent-zero dlog components
    bool exact = false;      // true when the obstruction vanishes
};

// For closed alpha = sum c_{a,i} z^a dlog z_i, returns h with
// d h = alpha - obstruction, via h_a = c_{a,i}/a_i for any i with a_i != 0.
// Closedness (the coefficient vector c_a parallel to a, for every a) is
// checked monomial-wise and its failure raises NotClosed.  The a = 0
// components admit no monomial potential and are returned as the
// obstruction.
LogFormSolution solve_exact_logform(const PolyvectorBV& B, const Polyvector& alpha);

// --- fuzz generator --------------------------------------------------------

// Reproducible pseudo-random valid complex: staircase pairs with exponents
// in {0} u [hbar, beta_target], one pair attaining the boundary depth
// beta_target exactly (clamped up to hbar when 0 < beta_target < hbar),
// a few free generators, conjugated by random same-degree transvections.
// rank bounds the number of generators; rank 0 gives the empty complex.
FloerTypeComplex random_floer_complex(std::uint64_t seed, int rank, const Rat& hbar,
                                      const Rat& beta_target);

}  // namespace novarch
