#include "doctest.h"

#include "novarch/complexes.hpp"
#include "novarch/errors.hpp"

#include <random>

using namespace novarch;

namespace {

Novikov T(const std::string& e, const std::string& c = "1") {
    return Novikov::monomial(parse_rat(e), parse_rat(c));
}

FloerTypeComplex ftc(std::vector<Generator> g, NovMat d, const Rat& hbar,
                     std::vector<Rat> rel = {}, bool z2 = false) {
    FloerTypeComplex c;
    c.basis.gens = std::move(g);
    c.basis.z2_graded = z2;
    c.d = std::move(d);
    c.hbar = hbar;
    c.relative_valuation = rel.empty() ? std::vector<Rat>(c.basis.gens.size(), Rat(0)) : rel;
    c.outside.assign(c.basis.gens.size(), 0);
    return c;
}

std::mt19937_64& rng() {
    static std::mt19937_64 r(0xFEEDFACE);
    return r;
}

// Staircase complex: pairs d(y_i) = T^{λ_i} x_i with λ_i on the grid (1/4)Z,
// plus a few free generators; all action valuations zero, ħ = 1/4.
FloerTypeComplex rand_staircase(int pairs, int frees) {
    std::vector<Generator> gens;
    for (int i = 0; i < pairs; ++i) {
        gens.push_back({"y" + std::to_string(i), 0, Rat(0)});
        gens.push_back({"x" + std::to_string(i), 1, Rat(0)});
    }
    for (int i = 0; i < frees; ++i)
        gens.push_back({"f" + std::to_string(i), static_cast<int>(rng()() % 2), Rat(0)});
    const int n = static_cast<int>(gens.size());
    NovMat d = nov_zero(n, n);
    for (int i = 0; i < pairs; ++i) {
        const Rat lam(static_cast<int>(rng()() % 5), 4);   // 0, 1/4, ..., 1
        d(2 * i + 1, 2 * i) = Novikov::monomial(lam);
    }
    return ftc(std::move(gens), std::move(d), Rat(1, 4));
}

}  // namespace

TEST_CASE("validation: zero differential is valid") {
    FloerTypeComplex c = ftc({{"a", 0, Rat(0)}, {"b", 1, Rat(1, 2)}}, nov_zero(2, 2), Rat(1));
    ValidationReport rep = validate_floer_type(c);
    CHECK(rep.valid);
    CHECK(rep.issues.empty());
    CHECK(!rep.observed_gap.has_value());
}

TEST_CASE("validation: norm increase is witnessed") {
    NovMat d = nov_zero(2, 2);
    d(1, 0) = Novikov(1);
    // |d y| = e^{1} > 1 = |y| since x has valuation -1.
    FloerTypeComplex c = ftc({{"y", 0, Rat(0)}, {"x", 1, Rat(-1)}}, d, Rat(1));
    ValidationReport rep = validate_floer_type(c);
    REQUIRE(!rep.valid);
    bool found = false;
    for (const auto& is : rep.issues)
        if (is.condition == "norm-increase" && is.witness.find("y") != std::string::npos)
            found = true;
    CHECK(found);
}

TEST_CASE("validation: scale gap, grading, d squared") {
    NovMat d = nov_zero(2, 2);
    d(1, 0) = T("1/3");
    FloerTypeComplex gap = ftc({{"y", 0, Rat(0)}, {"x", 1, Rat(0)}}, d, Rat(1, 2));
    ValidationReport rep = validate_floer_type(gap);
    REQUIRE(!rep.valid);
    CHECK(rep.issues.front().condition == "scale-gap");
    REQUIRE(rep.observed_gap.has_value());
    CHECK(*rep.observed_gap == Rat(1, 3));

    NovMat d2 = nov_zero(2, 2);
    d2(1, 0) = Novikov(1);
    FloerTypeComplex bad_deg = ftc({{"y", 0, Rat(0)}, {"x", 0, Rat(0)}}, d2, Rat(1));
    rep = validate_floer_type(bad_deg);
    REQUIRE(!rep.valid);
    CHECK(rep.issues.front().condition == "grading");
    CHECK_THROWS_AS(require_valid(bad_deg), GradingMismatch);

    // d(a) = b, d(b) = c with nonzero composition.
    NovMat d3 = nov_zero(3, 3);
    d3(1, 0) = Novikov(1);
    d3(2, 1) = Novikov(1);
    FloerTypeComplex notsq =
        ftc({{"a", 0, Rat(0)}, {"b", 1, Rat(0)}, {"c", 2, Rat(0)}}, d3, Rat(1));
    rep = validate_floer_type(notsq);
    REQUIRE(!rep.valid);
    bool dsq = false;
    for (const auto& is : rep.issues) dsq = dsq || is.condition == "d-squared";
    CHECK(dsq);
    CHECK_THROWS_AS(require_valid(notsq), NotAComplex);
}

TEST_CASE("two-scale split reconstructs the differential") {
    // d(z) = 2·T^{2/5} y + 3·T^{3/5} y2 with relative valuations making the
    // normalized exponents {0, 1/5}.
    NovMat d = nov_zero(3, 3);
    d(1, 0) = T("2/5", "2");
    d(2, 0) = T("3/5", "3");
    FloerTypeComplex c =
        ftc({{"z", 0, Rat(2, 5)}, {"y", 1, Rat(0)}, {"y2", 1, Rat(0)}}, d, Rat(1, 5),
            {Rat(2, 5), Rat(0), Rat(0)});
    REQUIRE(validate_floer_type(c).valid);

    MatQ d0 = c.split_d0();
    CHECK(d0(1, 0) == 2);
    CHECK(d0(2, 0) == 0);
    NovMat d1 = c.split_d1();
    CHECK((d1(2, 0) - Novikov(3)).is_zero());
    CHECK(d1(1, 0).is_zero());

    // theta = d0 + T^hbar d1 entrywise.
    NovMat th = c.d_theta();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Novikov expect = Novikov(d0(j, i)) + d1(j, i).shifted(c.hbar);
            CHECK((th(j, i) - expect).is_zero());
        }

    ReducedComplex g = associated_graded(c);
    CHECK(g.d0(1, 0) == 2);
    CHECK(g.d0(2, 0) == 0);
    CHECK(g.basis.gens[0].valuation == Rat(0));   // residual 2/5 - 2/5
    TorsionBarcode bc = homology_barcode(g);
    CHECK(bc.free_rank.at(1) == 1);   // y2 survives
    CHECK(bc.free_rank.count(0) == 0);
    CHECK(bc.max_torsion() == 0);
}

TEST_CASE("associated_graded keeps the full differential when d1 = 0") {
    NovMat d = nov_zero(2, 2);
    d(1, 0) = Novikov(Rat(5));
    FloerTypeComplex c = ftc({{"y", 0, Rat(0)}, {"x", 1, Rat(0)}}, d, Rat(1));
    ReducedComplex g = associated_graded(c);
    CHECK(g.d0(1, 0) == 5);
    CHECK(is_zero_mat(c.split_d1()));
}

TEST_CASE("telescope: single stage is the stage itself") {
    FloerTypeComplex s = rand_staircase(2, 1);
    Telescope tel = build_telescope({{s, NovMat()}});
    REQUIRE(tel.complex.size() == s.size());
    CHECK(tel.complex.basis.gens[0].name == s.basis.gens[0].name + "@0");
    for (int i = 0; i < s.size(); ++i)
        for (int j = 0; j < s.size(); ++j)
            CHECK((tel.complex.d(j, i) - s.d(j, i)).is_zero());
    CHECK(tel.complex.hbar == s.hbar);
}

TEST_CASE("telescope: two ground-field stages glued by the identity") {
    NovMat z = nov_zero(1, 1);
    FloerTypeComplex a = ftc({{"a", 0, Rat(0)}}, z, Rat(1));
    NovMat id1 = nov_identity(1);
    Telescope tel = build_telescope({{a, id1}, {a, NovMat()}});
    REQUIRE(tel.complex.size() == 3);
    // Generators a@0, a@1, q.a@0 with delta(q.a@0) = a@1 - a@0.
    const int qa = tel.complex.basis.index_of("q.a@0");
    const int a0 = tel.complex.basis.index_of("a@0");
    const int a1 = tel.complex.basis.index_of("a@1");
    REQUIRE(qa >= 0);
    CHECK(tel.complex.basis.gens[qa].degree == -1);
    CHECK((tel.complex.d(a1, qa) - Novikov(1)).is_zero());
    CHECK((tel.complex.d(a0, qa) + Novikov(1)).is_zero());

    TorsionBarcode bc = homology_barcode(tel.complex);
    CHECK(bc.free_rank.at(0) == 1);
    CHECK(bc.free_rank.count(-1) == 0);
    CHECK(bc.max_torsion() == 0);
}

TEST_CASE("telescope: failing chain map is rejected") {
    NovMat d = nov_zero(2, 2);
    d(1, 0) = T("1/4");
    FloerTypeComplex s0 = ftc({{"y", 0, Rat(0)}, {"x", 1, Rat(0)}}, d, Rat(1, 4));
    FloerTypeComplex s1 = ftc({{"y", 0, Rat(0)}, {"x", 1, Rat(0)}}, nov_zero(2, 2), Rat(1, 4));
    CHECK_THROWS_AS(build_telescope({{s0, nov_identity(2)}, {s1, NovMat()}}), NotChainMap);
}

TEST_CASE("telescope: fuzzed rays square to zero and gr commutes") {
    for (int iter = 0; iter < 25; ++iter) {
        FloerTypeComplex s = rand_staircase(1 + static_cast<int>(rng()() % 3),
                                            static_cast<int>(rng()() % 2));
        const int n = s.size();
        const int stages = 2 + static_cast<int>(rng()() % 2);

        // Diagonal unit scalings, constant on each staircase pair, are degree-0
        // chain maps; units 1 + c T^e keep norms and the filtration.
        std::vector<TelescopeStage> ray;
        for (int st = 0; st < stages; ++st) {
            NovMat kappa = nov_identity(n);
            for (int i = 0; i < n; i += 1) {
                if (rng()() % 2 == 0) continue;
                const Rat e(1 + static_cast<int>(rng()() % 4), 4);
                const Novikov u = Novikov(1) + Novikov::monomial(e, Rat(1 + static_cast<int>(rng()() % 3)));
                if (s.basis.gens[i].name[0] == 'y') {
                    kappa(i, i) = u;
                    kappa(i + 1, i + 1) = u;   // paired x_i shares the unit
                    ++i;
                } else if (s.basis.gens[i].name[0] == 'f') {
                    kappa(i, i) = u;
                }
            }
            ray.push_back({s, kappa});
        }
        ray.back().kappa = NovMat();

        Telescope tel = build_telescope(ray);
        NovMat sq = matmul(tel.complex.d, tel.complex.d);
        CHECK(is_zero_mat(sq));
        CHECK(tel.complex.hbar <= s.hbar);

        // gr of the telescope equals the telescope formula applied to the
        // stage-level gr data (d0 blocks, exponent-zero part of kappa).
        ReducedComplex grt = associated_graded(tel.complex);
        MatQ expected = MatQ::Zero(tel.complex.size(), tel.complex.size());
        MatQ sd0 = s.split_d0();
        const int m = stages;
        std::vector<int> plain(m), cone(m, -1);
        for (int st = 0; st < m; ++st) plain[st] = st * n;
        for (int st = 0; st + 1 < m; ++st) cone[st] = m * n + st * n;
        for (int st = 0; st < m; ++st)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) expected(plain[st] + j, plain[st] + i) = sd0(j, i);
        for (int st = 0; st + 1 < m; ++st) {
            NovMat kth = normalize_map(ray[st].kappa, s.relative_valuation, s.relative_valuation);
            for (int i = 0; i < n; ++i) {
                const Rat sign = s.basis.gens[i].degree % 2 == 0 ? 1 : -1;
                for (int j = 0; j < n; ++j) {
                    expected(cone[st] + j, cone[st] + i) = sd0(j, i);
                    expected(plain[st + 1] + j, cone[st] + i) = sign * kth(j, i).coeff_at(0);
                }
                expected(plain[st] + i, cone[st] + i) -= sign;
            }
        }
        for (int i = 0; i < tel.complex.size(); ++i)
            for (int j = 0; j < tel.complex.size(); ++j)
                CHECK(grt.d0(j, i) == expected(j, i));
    }
}

TEST_CASE("quotient_outside: no flags is the identity") {
    NovMat d = nov_zero(2, 2);
    d(1, 0) = Novikov(1);
    FloerTypeComplex c = ftc({{"y", 0, Rat(0)}, {"x", 1, Rat(0)}}, d, Rat(1));
    ReducedComplex g = associated_graded(c);
    ReducedComplex q = quotient_outside(g);
    CHECK(q.size() == 2);
    CHECK(q.d0(1, 0) == 1);
}

TEST_CASE("quotient_outside: flagged acyclic pair is removed, barcode kept") {
    // a unflagged; flagged pair with d0 c = b at equal valuations.
    ReducedComplex g;
    g.basis.gens = {{"a", 0, Rat(1, 3)}, {"c", 0, Rat(1, 5)}, {"b", 1, Rat(1, 5)}};
    g.d0 = MatQ::Zero(3, 3);
    g.d0(2, 1) = 1;
    g.hbar = Rat(1);
    g.outside = {0, 1, 1};
    TorsionBarcode before = homology_barcode(g);

    ReducedComplex q = quotient_outside(g);
    REQUIRE(q.size() == 1);
    CHECK(q.basis.gens[0].name == "a");
    CHECK(homology_barcode(q) == before);
    CHECK(before.free_rank.at(0) == 1);
}

TEST_CASE("quotient_outside: violations") {
    ReducedComplex g;
    g.basis.gens = {{"b", 1, Rat(0)}, {"c", 0, Rat(0)}};
    g.d0 = MatQ::Zero(2, 2);
    g.d0(0, 1) = 1;
    g.hbar = Rat(1);

    g.outside = {0, 1};   // flag only the source: d0(c) = b leaves the block
    CHECK_THROWS_AS(quotient_outside(g), NotSubcomplex);

    ReducedComplex lone;
    lone.basis.gens = {{"a", 0, Rat(0)}, {"z", 0, Rat(0)}};
    lone.d0 = MatQ::Zero(2, 2);
    lone.hbar = Rat(1);
    lone.outside = {0, 1};   // flagged generator with no differential: free class
    CHECK_THROWS_AS(quotient_outside(lone), NotAcyclic);

    // Flagged pair with a positive torsion exponent is not strictly acyclic.
    ReducedComplex tor;
    tor.basis.gens = {{"a", 0, Rat(0)}, {"c", 0, Rat(0)}, {"b", 1, Rat(1, 2)}};
    tor.d0 = MatQ::Zero(3, 3);
    tor.d0(2, 1) = 1;   // normalized exponent 1/2
    tor.hbar = Rat(1);
    tor.outside = {0, 1, 1};
    CHECK_THROWS_AS(quotient_outside(tor), NotAcyclic);
}
