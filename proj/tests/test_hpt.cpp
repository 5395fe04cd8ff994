#include "doctest.h"

#include "novarch/complexes.hpp"
#include "novarch/errors.hpp"
#include "novarch/hpt.hpp"

#include <algorithm>
#include <random>

using namespace novarch;

namespace {

Novikov T(const std::string& e, const std::string& c = "1") {
    return Novikov::monomial(parse_rat(e), parse_rat(c));
}

FloerTypeComplex ftc(std::vector<Generator> g, NovMat d, const Rat& hbar) {
    FloerTypeComplex c;
    c.basis.gens = std::move(g);
    c.d = std::move(d);
    c.hbar = hbar;
    c.relative_valuation.assign(c.basis.gens.size(), Rat(0));
    c.outside.assign(c.basis.gens.size(), 0);
    return c;
}

ReducedComplex rc(std::vector<Generator> g, MatQ d0, const Rat& hbar) {
    ReducedComplex c;
    c.basis.gens = std::move(g);
    c.d0 = std::move(d0);
    c.hbar = hbar;
    c.outside.assign(c.basis.gens.size(), 0);
    return c;
}

// Staircase d(y_i) = T^{t·λ_i} x_i conjugated by random same-degree
// transvections with exponents on the grid (t/4)Z; β = t·max λ_i is known by
// construction and conjugation is a basis isometry.
struct Known {
    FloerTypeComplex c;
    Rat beta;
};

Known rand_conj(std::uint64_t seed, const Rat& t = Rat(1)) {
    std::mt19937_64 gen(seed);
    const int pairs = 1 + static_cast<int>(gen() % 3);
    const int frees = static_cast<int>(gen() % 3);
    std::vector<Generator> gens;
    for (int i = 0; i < pairs; ++i) {
        gens.push_back({"y" + std::to_string(i), 0, Rat(0)});
        gens.push_back({"x" + std::to_string(i), 1, Rat(0)});
    }
    for (int i = 0; i < frees; ++i)
        gens.push_back({"f" + std::to_string(i), static_cast<int>(gen() % 2), Rat(0)});
    const int n = static_cast<int>(gens.size());

    NovMat d = nov_zero(n, n);
    Rat beta = 0;
    for (int i = 0; i < pairs; ++i) {
        const Rat lam = t * Rat(static_cast<int>(gen() % 5), 4);
        d(2 * i + 1, 2 * i) = Novikov::monomial(lam);
        beta = std::max(beta, lam);
    }

    const int rounds = 2 + static_cast<int>(gen() % 4);
    for (int r = 0; r < rounds; ++r) {
        const int a = static_cast<int>(gen() % n);
        int b = static_cast<int>(gen() % n);
        if (a == b || gens[a].degree != gens[b].degree) continue;
        const Rat coef = (gen() % 2) ? Rat(1) : Rat(-2);
        const Novikov f = Novikov::monomial(t * Rat(static_cast<int>(gen() % 4), 4), coef);
        // d ← P d P⁻¹ for the transvection P = I + f·E_{ab}.
        for (int row = 0; row < n; ++row) d(row, b) -= f * d(row, a);
        for (int col = 0; col < n; ++col) d(a, col) += f * d(b, col);
    }
    return {ftc(std::move(gens), std::move(d), t * Rat(1, 4)), beta};
}

// Rational staircase with valuation-carrying targets, in shuffled generator
// order: d0(x_i) pairs y_i → x_i with val(x_i) = λ_i, so β = max λ_i.
struct KnownReduced {
    ReducedComplex c;
    Rat beta;
};

KnownReduced rand_reduced(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    const int pairs = 1 + static_cast<int>(gen() % 3);
    const int frees = static_cast<int>(gen() % 3);
    const int n = 2 * pairs + frees;

    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[i] = i;
    std::shuffle(pos.begin(), pos.end(), gen);

    std::vector<Generator> gens(n);
    MatQ d0 = MatQ::Zero(n, n);
    Rat beta = 0;
    int slot = 0;
    for (int i = 0; i < pairs; ++i) {
        const Rat lam(static_cast<int>(gen() % 5), 4);
        const int y = pos[slot++], x = pos[slot++];
        gens[y] = {"y" + std::to_string(i), 0, Rat(0)};
        gens[x] = {"x" + std::to_string(i), 1, lam};
        d0(x, y) = (gen() % 2) ? 1 : -3;
        beta = std::max(beta, lam);
    }
    for (int i = 0; i < frees; ++i) {
        const int f = pos[slot++];
        gens[f] = {"f" + std::to_string(i), static_cast<int>(gen() % 2),
                   Rat(static_cast<int>(gen() % 3), 4)};
    }
    return {rc(std::move(gens), std::move(d0), Rat(1)), beta};
}

std::vector<Rat> hvals(const SDRData& sdr) {
    std::vector<Rat> hv(sdr.homology.gens.size());
    for (std::size_t j = 0; j < hv.size(); ++j) hv[j] = sdr.homology.gens[j].valuation;
    return hv;
}

}  // namespace

TEST_CASE("boundary depth: base cases") {
    FloerTypeComplex z = ftc({{"a", 0, Rat(0)}, {"b", 1, Rat(0)}}, nov_zero(2, 2), Rat(1));
    CHECK(boundary_depth_def(z) == 0);
    CHECK(boundary_depth_torsion(z) == 0);

    NovMat d = nov_zero(2, 2);
    d(1, 0) = T("5/7");
    FloerTypeComplex s = ftc({{"y", 0, Rat(0)}, {"x", 1, Rat(0)}}, std::move(d), Rat(1, 7));
    CHECK(boundary_depth_def(s) == Rat(5, 7));
    CHECK(boundary_depth_torsion(s) == Rat(5, 7));

    // Same bar carried by the valuations instead of the matrix entry.
    NovMat d2 = nov_zero(2, 2);
    d2(1, 0) = Novikov(1);
    FloerTypeComplex v = ftc({{"y", 0, Rat(0)}, {"x", 1, Rat(5, 7)}}, std::move(d2), Rat(1, 7));
    CHECK(boundary_depth_def(v) == Rat(5, 7));
    CHECK(boundary_depth_torsion(v) == Rat(5, 7));
}

TEST_CASE("special retraction: two-generator oracle") {
    MatQ d0 = MatQ::Zero(2, 2);
    d0(1, 0) = 1;
    ReducedComplex g = rc({{"y", 0, Rat(0)}, {"x", 1, Rat(2, 3)}}, std::move(d0), Rat(1));
    SDRData sdr = special_dr(g);

    CHECK(sdr.beta == Rat(2, 3));
    CHECK(sdr.homology.gens.empty());
    CHECK((sdr.h(0, 1) - T("-2/3")).is_zero());
    CHECK(matrix_val(sdr.h) == ExtRat(Rat(-2, 3)));
    CHECK(boundary_depth_def(g) == Rat(2, 3));
    CHECK(boundary_depth_torsion(g) == Rat(2, 3));
}

TEST_CASE("special retraction: zero differential is the identity retract") {
    ReducedComplex g = rc({{"a", 0, Rat(0)}, {"b", 1, Rat(1, 2)}, {"c", 0, Rat(1, 3)}},
                          MatQ::Zero(3, 3), Rat(1));
    SDRData sdr = special_dr(g);

    CHECK(sdr.beta == 0);
    REQUIRE(sdr.homology.size() == 3);
    CHECK(is_zero_mat(sdr.h));
    NovMat pi = matmul(sdr.p, sdr.i);
    for (int j = 0; j < 3; ++j) pi(j, j) -= Novikov(1);
    CHECK(is_zero_mat(pi));
    // Classes are normalized to unit norm: each i-column is a unit vector.
    for (int j = 0; j < 3; ++j) {
        CHECK(column_val(sdr.i, j) == ExtRat(Rat(0)));
        CHECK(sdr.homology.gens[j].valuation == 0);
    }
}

TEST_CASE("perturb: zero perturbation returns the input retract") {
    KnownReduced kr = rand_reduced(11);
    SDRData sdr = special_dr(kr.c);
    PerturbedSDR out = perturb(sdr, nov_zero(kr.c.size(), kr.c.size()));

    CHECK(is_zero_mat(out.d_def));
    CHECK(is_zero_mat(out.i1 - sdr.i));
    CHECK(is_zero_mat(out.p1 - sdr.p));
    CHECK(is_zero_mat(out.h1 - sdr.h));
    CHECK(!out.series_truncated);
    CHECK(out.series_terms == 0);
    CHECK(check_perturbed_sdr(sdr, nov_zero(kr.c.size(), kr.c.size()), out).ok);
}

TEST_CASE("perturb: three-generator oracle") {
    // G = span(a) ⊕ acyclic pair d0(c) = b; the perturbation hits a only.
    MatQ d0 = MatQ::Zero(3, 3);
    d0(2, 1) = 1;
    ReducedComplex g = rc({{"a", 0, Rat(0)}, {"c", 0, Rat(0)}, {"b", 1, Rat(0)}},
                          std::move(d0), Rat(1));
    SDRData sdr = special_dr(g);
    REQUIRE(sdr.homology.size() == 1);
    CHECK(sdr.homology.gens[0].degree == 0);
    CHECK(sdr.beta == 0);

    NovMat delta = nov_zero(3, 3);
    delta(2, 0) = T("1/3");
    PerturbedSDR out = perturb(sdr, delta);

    CHECK(out.series_terms == 1);
    CHECK(!out.series_truncated);
    CHECK(is_zero_mat(out.d_def));
    // i₁(α) = a − T^{1/3} c, hand-expanded from i − h S i.
    CHECK((out.i1(0, 0) - Novikov(1)).is_zero());
    CHECK((out.i1(1, 0) - T("1/3", "-1")).is_zero());
    CHECK(out.i1(2, 0).is_zero());
    CHECK(is_zero_mat(out.p1 - sdr.p));
    CHECK(is_zero_mat(out.h1 - sdr.h));
    CHECK(check_perturbed_sdr(sdr, delta, out).ok);
}

TEST_CASE("perturb: second-order oracle fixes the resolvent sign") {
    // d0(u) = v; δ(x) = T^{2/7} v, δ(u) = T^{3/7} y.  The induced
    // differential is the second-order term −T^{5/7} [x] ↦ [y].
    MatQ d0 = MatQ::Zero(4, 4);
    d0(2, 1) = 1;
    ReducedComplex g = rc({{"x", 0, Rat(0)}, {"u", 0, Rat(0)}, {"v", 1, Rat(0)}, {"y", 1, Rat(0)}},
                          std::move(d0), Rat(1));
    SDRData sdr = special_dr(g);
    REQUIRE(sdr.homology.size() == 2);
    REQUIRE(sdr.homology.gens[0].degree == 0);
    REQUIRE(sdr.homology.gens[1].degree == 1);

    NovMat delta = nov_zero(4, 4);
    delta(2, 0) = T("2/7");
    delta(3, 1) = T("3/7");
    PerturbedSDR out = perturb(sdr, delta);

    CHECK(out.series_terms == 2);
    CHECK(!out.series_truncated);
    CHECK((out.d_def(1, 0) - T("5/7", "-1")).is_zero());
    CHECK(out.d_def(0, 0).is_zero());
    CHECK(out.d_def(0, 1).is_zero());
    CHECK(out.d_def(1, 1).is_zero());
    CHECK(out.d_def_shift == ExtRat(Rat(5, 7)));

    // i₁([x]) = x̂ − T^{2/7} û, i₁([y]) = ŷ.
    CHECK((out.i1(0, 0) - Novikov(1)).is_zero());
    CHECK((out.i1(1, 0) - T("2/7", "-1")).is_zero());
    CHECK((out.i1(3, 1) - Novikov(1)).is_zero());
    // p₁([y]-row) picks up −T^{3/7} on v̂.
    CHECK((out.p1(1, 2) - T("3/7", "-1")).is_zero());
    CHECK(is_zero_mat(out.h1 - sdr.h));
    CHECK(check_perturbed_sdr(sdr, delta, out).ok);

    // With the opposite resolvent sign the chain-map identity d i₁ = i₁ d_def
    // fails; guard against regressions by checking the identity directly.
    const NovMat d = g.d0_norm() + delta;
    CHECK(is_zero_mat(matmul(d, out.i1) - matmul(out.i1, out.d_def)));
}

TEST_CASE("perturb: the norm bound is strict and eps is validated") {
    MatQ d0 = MatQ::Zero(2, 2);
    d0(1, 0) = 1;
    ReducedComplex g = rc({{"u", 0, Rat(0)}, {"w", 1, Rat(1, 2)}}, std::move(d0), Rat(1, 2));
    SDRData sdr = special_dr(g);
    CHECK(sdr.beta == Rat(1, 2));

    NovMat at_bound = nov_zero(2, 2);
    at_bound(1, 0) = T("1/2", "3");
    CHECK_THROWS_AS(perturb(sdr, at_bound), PerturbationTooLarge);

    NovMat below = nov_zero(2, 2);
    below(1, 0) = T("51/100");
    PerturbedSDR out = perturb(sdr, below);
    CHECK(out.eps == Rat(1, 700));   // min(1/100, (51/100 − 1/2)/7)

    CHECK_THROWS_AS(perturb(sdr, below, Rat(1, 10)), InvariantError);
    PerturbedSDR out2 = perturb(sdr, below, Rat(1, 1000));
    CHECK(out2.eps == Rat(1, 1000));
    CHECK(check_perturbed_sdr(sdr, below, out2).ok);
}

TEST_CASE("perturb: non-nilpotent series truncates at working precision") {
    MatQ d0 = MatQ::Zero(2, 2);
    d0(1, 0) = 1;
    ReducedComplex g = rc({{"u", 0, Rat(0)}, {"v", 1, Rat(0)}}, std::move(d0), Rat(1, 2));
    SDRData sdr = special_dr(g);

    NovMat delta = nov_zero(2, 2);
    delta(1, 0) = T("1/2");
    PerturbedSDR out = perturb(sdr, delta);

    CHECK(out.series_truncated);
    CHECK(out.series_terms == 19);   // exponents k/2 for k = 1..19 below cutoff 10
    CHECK(out.precision == ExtRat(Rat(10)));
    // S(û) = T^{1/2} v̂ − T^1 v̂ + T^{3/2} v̂ − …
    CHECK(out.S(1, 0).coeff_at(Rat(1, 2)) == 1);
    CHECK(out.S(1, 0).coeff_at(Rat(1)) == -1);
    CHECK(out.S(1, 0).coeff_at(Rat(3, 2)) == 1);
    CHECK(check_perturbed_sdr(sdr, delta, out).ok);
}

TEST_CASE("boundary depth: routes agree and scale on conjugated staircases") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        Known k = rand_conj(seed);
        CHECK(boundary_depth_def(k.c) == k.beta);
        CHECK(boundary_depth_torsion(k.c) == k.beta);
    }
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Rat base = rand_conj(seed).beta;
        for (const Rat& t : {Rat(1, 3), Rat(2), Rat(7, 2)}) {
            Known k = rand_conj(seed, t);
            CHECK(k.beta == t * base);
            CHECK(boundary_depth_def(k.c) == t * base);
            CHECK(boundary_depth_torsion(k.c) == t * base);
        }
    }
}

TEST_CASE("special retraction: identities and norm bounds on fuzzed bases") {
    int with_torsion = 0;
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        KnownReduced kr = rand_reduced(seed);
        SDRData sdr = special_dr(kr.c);   // identities are asserted internally
        CHECK(sdr.beta == kr.beta);

        const int n = kr.c.size();
        const std::vector<Rat> zero(n, Rat(0));
        const std::vector<Rat> hv = hvals(sdr);
        if (!sdr.homology.gens.empty()) {
            // |i| = 1 attained on every class; |p| ≤ 1.  Rows carry the target
            // valuations, columns the source ones.
            const NovMat inorm = normalize_map(sdr.i, zero, hv);
            for (Eigen::Index j = 0; j < inorm.cols(); ++j)
                CHECK(column_val(inorm, j) == ExtRat(Rat(0)));
            const NovMat pnorm = normalize_map(sdr.p, hv, zero);
            CHECK(!(matrix_val(pnorm) < ExtRat(Rat(0))));
        }
        // |h| = e^β exactly whenever the reduced differential is nonzero.
        if (!is_zero_mat(sdr.base.d0_nov())) {
            CHECK(matrix_val(sdr.h) == ExtRat(-sdr.beta));
            if (sdr.beta > 0) ++with_torsion;
        }
    }
    CHECK(with_torsion > 5);
}

TEST_CASE("perturb_complex: transfer preserves barcodes on conjugated staircases") {
    int nontrivial = 0;
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
        Known k = rand_conj(seed);
        require_valid(k.c);
        const ReducedComplex g = associated_graded(k.c);
        const SDRData sdr = special_dr(g);
        const NovMat delta = normalized_perturbation(k.c);
        const PerturbedSDR out = perturb(sdr, delta);

        CHECK(check_perturbed_sdr(sdr, delta, out).ok);
        CHECK(!(out.d_def_shift < ExtRat(k.c.hbar)));
        if (out.d_def_shift.is_finite()) ++nontrivial;

        const FloerTypeComplex model = perturbed_model(sdr, out);
        CHECK(homology_barcode(model) == homology_barcode(k.c));
        CHECK(boundary_depth_torsion(model) == k.beta);
    }
    CHECK(nontrivial > 5);
}
