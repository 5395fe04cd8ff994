#include "doctest.h"

#include "novarch/complexes.hpp"
#include "novarch/errors.hpp"
#include "novarch/spectral.hpp"
#include "novarch/tauflux.hpp"

#include <map>
#include <random>
#include <string>
#include <vector>

using namespace novarch;

namespace {

VecQ vq(const std::vector<std::string>& entries) {
    VecQ v(static_cast<int>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) v(static_cast<int>(i)) = parse_rat(entries[i]);
    return v;
}

// m = 3 classes pairing against a k = 2 flux plane.
RelLattice demo_lattice() {
    RelLattice L;
    L.m = 3;
    L.w0 = vq({"1", "1/2", "2"});
    L.boundary = MatQ(2, 3);
    L.boundary << Rat(1), Rat(0), Rat(-1), Rat(0), Rat(1), Rat(-2);
    return L;
}

FluxPolytope demo_triangle() {
    return make_polytope({vq({"1", "0"}), vq({"-1", "1"}), vq({"0", "-1"})});
}

// Independent evaluation of ell_v(alpha) from raw data.
Rat ell_oracle(const RelLattice& L, const ClassVec& a, const VecQ& v) {
    Rat c(0);
    for (int i = 0; i < L.m; ++i) c += L.w0(i) * Rat(a[i]);
    for (int i = 0; i < L.boundary.rows(); ++i) {
        Rat gi(0);
        for (int j = 0; j < L.m; ++j) gi += L.boundary(i, j) * Rat(a[j]);
        c += v(i) * gi;
    }
    return c;
}

FloerTypeComplex pair_complex(const std::string& mu, const Rat& hbar,
                              const std::vector<Rat>& rel = {Rat(0), Rat(0)}) {
    FloerTypeComplex c;
    c.basis.gens.push_back({"a0", 0, Rat(0)});
    c.basis.gens.push_back({"a1", 1, Rat(0)});
    c.d = nov_zero(2, 2);
    if (mu != "inf") c.d(1, 0) = Novikov::monomial(parse_rat(mu));
    c.hbar = hbar;
    c.relative_valuation = rel;
    c.outside.assign(2, 0);
    require_valid(c);
    return c;
}

}  // namespace

TEST_CASE("class cone: membership matches the vertex inequalities and the grid") {
    const RelLattice L = demo_lattice();
    CHECK_NOTHROW(validate_rel_lattice(L));
    const FluxPolytope P = demo_triangle();
    CHECK(P.contains_origin);

    // a boundaryless class with positive action is a member of every cone
    RelLattice free_dir = L;
    free_dir.boundary = MatQ(2, 3);
    free_dir.boundary.setZero();
    free_dir.w0 = vq({"2", "2", "2"});
    CHECK(cone_membership({1, 0, 0}, P, free_dir));
    CHECK(cone_membership({0, 3, 1}, P, free_dir));

    // w0 = 1 against gradient 1 on the segment [-2, 2] fails at v = -2
    RelLattice line;
    line.m = 1;
    line.w0 = vq({"1"});
    line.boundary = MatQ(1, 1);
    line.boundary(0, 0) = Rat(1);
    const FluxPolytope seg = make_polytope({vq({"-2"}), vq({"2"})});
    CHECK(!cone_membership({1}, seg, line));
    CHECK(ell(line, {1}, vq({"-2"})) == Rat(-1));

    // random classes agree with barycentric grid sampling at resolution 1/16
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<long> pick(-3, 3);
    for (int trial = 0; trial < 40; ++trial) {
        const ClassVec a = {pick(gen), pick(gen), pick(gen)};
        bool grid_ok = true;
        for (int i = 0; i <= 16 && grid_ok; ++i)
            for (int j = 0; i + j <= 16 && grid_ok; ++j) {
                const Rat li(i, 16), lj(j, 16), lk(16 - i - j, 16);
                const VecQ v = li * P.vertices[0] + lj * P.vertices[1] + lk * P.vertices[2];
                if (ell_oracle(L, a, v) < 0) grid_ok = false;
            }
        CHECK(cone_membership(a, P, L) == grid_ok);
    }

    RelLattice bad = L;
    bad.w0 = vq({"1"});
    CHECK_THROWS_AS(validate_rel_lattice(bad), SchemaError);
    bad = L;
    bad.boundary(0, 0) = parse_rat("1/2");
    CHECK_THROWS_AS(validate_rel_lattice(bad), SchemaError);
    CHECK_THROWS_AS(cone_membership({1, 0}, P, L), SchemaError);
}

TEST_CASE("flux polytopes: construction, membership, and hull solvers") {
    CHECK_THROWS_AS(make_polytope({}), SchemaError);
    // a midpoint of two vertices is a redundant vertex
    CHECK_THROWS_AS(make_polytope({vq({"0"}), vq({"2"}), vq({"1"})}), SchemaError);
    CHECK_THROWS_AS(make_polytope({vq({"0", "0"}), vq({"1"})}), SchemaError);

    const FluxPolytope P = demo_triangle();
    CHECK(point_in_polytope(P, vq({"0", "0"})));
    CHECK(point_in_polytope(P, vq({"1", "0"})));
    CHECK(point_in_polytope(P, vq({"0", "1/2"})));  // edge midpoint
    CHECK(!point_in_polytope(P, vq({"1", "1"})));
    CHECK(!point_in_polytope(P, vq({"-2", "0"})));

    const FluxPolytope off = make_polytope({vq({"1", "0"}), vq({"2", "0"}), vq({"1", "1"})});
    CHECK(!off.contains_origin);

    CHECK(conic_membership({}, vq({"0", "0"})));
    CHECK(!conic_membership({}, vq({"1", "0"})));
    CHECK(conic_membership({vq({"1", "1"}), vq({"1", "-1"})}, vq({"3", "1"})));
    CHECK(!conic_membership({vq({"1", "1"}), vq({"1", "-1"})}, vq({"-1", "0"})));
}

TEST_CASE("cone ring: specialization is additive and multiplicative") {
    const RelLattice L = demo_lattice();
    const FluxPolytope P = demo_triangle();

    // the zero class specializes to 1 everywhere
    const ConeRingElement unit = cone_ring_element({{{0, 0, 0}, Rat(1)}}, P, L);
    CHECK(specialize(unit, vq({"0", "0"}), P, L) == Novikov(1));
    CHECK(specialize(unit, vq({"1", "0"}), P, L) == Novikov(1));

    // spelled-out arithmetic: w0(u) = 1, gradient (1, 0), v = (1/2, 0)
    RelLattice flat;
    flat.m = 1;
    flat.w0 = vq({"1"});
    flat.boundary = MatQ(2, 1);
    flat.boundary << Rat(1), Rat(0);
    const FluxPolytope box =
        make_polytope({vq({"1", "1"}), vq({"1", "-1"}), vq({"-1", "1"}), vq({"-1", "-1"})});
    const ConeRingElement eu = cone_ring_element({{{1}, Rat(1)}}, box, flat);
    CHECK(specialize(eu, vq({"1/2", "0"}), box, flat) ==
          Novikov::monomial(parse_rat("3/2")));
    CHECK_THROWS_AS(specialize(eu, vq({"2", "0"}), box, flat), PointOutsidePolytope);

    // random members: gather cone classes, then check the ring identities
    std::mt19937_64 gen(11);
    std::uniform_int_distribution<long> pick(-3, 3);
    std::vector<ClassVec> members;
    while (members.size() < 8) {
        const ClassVec a = {pick(gen), pick(gen), pick(gen)};
        if (cone_membership(a, P, L)) members.push_back(a);
    }
    const std::vector<Rat> coeffs = {Rat(1), Rat(1, 2), Rat(2), Rat(3)};
    const std::vector<VecQ> probes = {P.vertices[0], P.vertices[1], P.vertices[2],
                                      vq({"0", "0"})};
    for (int trial = 0; trial < 20; ++trial) {
        std::map<ClassVec, Rat> ta, tb;
        ta[members[gen() % members.size()]] = coeffs[gen() % coeffs.size()];
        ta[members[gen() % members.size()]] += coeffs[gen() % coeffs.size()];
        tb[members[gen() % members.size()]] = coeffs[gen() % coeffs.size()];
        tb[members[gen() % members.size()]] += coeffs[gen() % coeffs.size()];
        const ConeRingElement x = cone_ring_element(ta, P, L);
        const ConeRingElement y = cone_ring_element(tb, P, L);
        for (const VecQ& v : probes) {
            CHECK(specialize(ring_add(x, y), v, P, L) ==
                  specialize(x, v, P, L) + specialize(y, v, P, L));
            CHECK(specialize(ring_mul(x, y), v, P, L) ==
                  specialize(x, v, P, L) * specialize(y, v, P, L));
            // positive coefficients: the valuation is the minimum of the
            // class functionals, the pointwise profile value
            ExtRat lead = ExtRat::infinity();
            for (const auto& [cls, q] : x.terms) lead = ext_min(lead, ExtRat(ell(L, cls, v)));
            CHECK(specialize(x, v, P, L).val() == lead);
        }
    }

    // a class leaving the cone is rejected with the failing vertex
    ClassVec out = {-3, -3, -3};
    REQUIRE(!cone_membership(out, P, L));
    try {
        cone_ring_element({{out, Rat(1)}}, P, L);
        FAIL("expected ClassOutsideCone");
    } catch (const ClassOutsideCone& e) {
        CHECK(std::string(e.what()).find("vertex") != std::string::npos);
    }
}

TEST_CASE("valuation profile: minimum of linear pieces, concave, exact") {
    const RelLattice L = demo_lattice();
    const FluxPolytope P = demo_triangle();

    // empty list and the zero class alone both give the constant +infinity
    CHECK(tau_eval({}, P, L).eval(vq({"0", "0"})).is_inf());
    CHECK(tau_eval({{0, 0, 0}}, P, L).pieces.empty());
    CHECK(tau_eval({{0, 0, 0}}, P, L).argmin_piece(vq({"0", "0"})) == -1);

    // a single class is a linear function: midpoint equality everywhere
    const PLConcaveFunction lin = tau_eval({{1, 0, 0}}, P, L);
    REQUIRE(lin.pieces.size() == 1);
    const VecQ a = P.vertices[0], b = P.vertices[1];
    const VecQ mid = Rat(1, 2) * (a + b);
    CHECK(lin.eval(mid).value() * 2 == lin.eval(a).value() + lin.eval(b).value());

    // two crossing pieces on [-1, 1]: exact values and a strict kink at 0
    RelLattice kinkL;
    kinkL.m = 2;
    kinkL.w0 = vq({"1", "1"});
    kinkL.boundary = MatQ(1, 2);
    kinkL.boundary << Rat(1), Rat(-1);
    const FluxPolytope seg = make_polytope({vq({"-1"}), vq({"1"})});
    const PLConcaveFunction kink = tau_eval({{1, 0}, {0, 1}}, seg, kinkL);
    REQUIRE(kink.pieces.size() == 2);
    for (int i = -8; i <= 8; ++i) {
        const Rat v(i, 8);
        Rat expect = Rat(1) + v;
        if (Rat(1) - v < expect) expect = Rat(1) - v;
        VecQ pt(1);
        pt(0) = v;
        CHECK(kink.eval(pt) == ExtRat(expect));
    }
    CHECK(kink.eval(vq({"0"})).value() * 2 > kink.eval(vq({"-1"})).value() +
                                                 kink.eval(vq({"1"})).value());
    CHECK(kink.argmin_piece(vq({"-1/2"})) == 0);
    CHECK(kink.argmin_piece(vq({"1/2"})) == 1);

    CHECK_THROWS_AS(tau_eval({{-3, -3, -3}}, P, L), ClassOutsideCone);

    // concavity: 1000 random pairs in the triangle, exact midpoint test
    std::mt19937_64 gen(13);
    std::uniform_int_distribution<long> pick(-3, 3);
    std::vector<ClassVec> members;
    while (members.size() < 5) {
        const ClassVec c = {pick(gen), pick(gen), pick(gen)};
        bool zero = c[0] == 0 && c[1] == 0 && c[2] == 0;
        if (!zero && cone_membership(c, P, L)) members.push_back(c);
    }
    const PLConcaveFunction tau = tau_eval(members, P, L);
    std::uniform_int_distribution<long> wgt(0, 12);
    const auto sample = [&]() {
        Rat u(wgt(gen), 12), w(wgt(gen), 12);
        if (u + w > 1) {
            u = Rat(1) - u;
            w = Rat(1) - w;
        }
        return VecQ(u * P.vertices[0] + w * P.vertices[1] +
                    (Rat(1) - u - w) * P.vertices[2]);
    };
    for (int trial = 0; trial < 1000; ++trial) {
        const VecQ x = sample(), y = sample();
        const VecQ m = Rat(1, 2) * (x + y);
        CHECK(tau.eval(m).value() * 2 >= tau.eval(x).value() + tau.eval(y).value());
    }

    // scaling the action data and the polytope scales the profile, and the
    // attaining piece at matching points is unchanged
    for (const Rat& t : {Rat(1, 3), Rat(2), Rat(7, 2)}) {
        RelLattice Ls = L;
        Ls.w0 = t * L.w0;
        std::vector<VecQ> scaled;
        for (const VecQ& v : P.vertices) scaled.push_back(t * v);
        const FluxPolytope Ps = make_polytope(scaled);
        const PLConcaveFunction taus = tau_eval(members, Ps, Ls);
        for (int trial = 0; trial < 50; ++trial) {
            const VecQ v = sample();
            CHECK(taus.eval(t * v).value() == t * tau.eval(v).value());
            CHECK(taus.argmin_piece(t * v) == tau.argmin_piece(v));
        }
    }
}

TEST_CASE("dual cone: generators, vanishing boundary, and sampling") {
    // single-point star at the origin: the half-space w0 >= 0
    RelLattice half;
    half.m = 2;
    half.w0 = vq({"1", "0"});
    half.boundary = MatQ(1, 2);
    half.boundary << Rat(0), Rat(1);
    StarShape origin_only;
    origin_only.points.push_back(vq({"0"}));
    const DualCone hs = dual_cone(half, origin_only);
    REQUIRE(hs.generators.size() == 3);
    CHECK(hs.generators[0] == vq({"0", "-1"}));
    CHECK(hs.generators[1] == vq({"0", "1"}));
    CHECK(hs.generators[2] == vq({"1", "0"}));
    CHECK(!hs.boundary_vanishes);

    // full +- line basis forces the boundary of every generator to vanish
    RelLattice L;
    L.m = 3;
    L.w0 = vq({"1", "1", "1"});
    L.boundary = MatQ(2, 3);
    L.boundary << Rat(1), Rat(0), Rat(-1), Rat(0), Rat(1), Rat(-1);
    StarShape full;
    full.full_lines = {vq({"1", "0"}), vq({"0", "1"})};
    const DualCone closed = dual_cone(L, full);
    CHECK(closed.boundary_vanishes);
    REQUIRE(closed.generators.size() == 1);
    CHECK(closed.generators[0] == vq({"1", "1", "1"}));

    // dropping one line direction reopens a boundary direction
    StarShape partial;
    partial.full_lines = {vq({"1", "0"})};
    const DualCone open_cone = dual_cone(L, partial);
    CHECK(!open_cone.boundary_vanishes);
    const MatQ rows = dual_cone_inequalities(L, partial);
    for (const VecQ& g : open_cone.generators) {
        for (int r = 0; r < rows.rows(); ++r) {
            Rat s(0);
            for (int j = 0; j < L.m; ++j) s += rows(r, j) * g(j);
            CHECK(s >= 0);
        }
    }

    // membership sampling: inequalities and generators agree on a box
    std::mt19937_64 gen(17);
    std::uniform_int_distribution<long> pick(-4, 4);
    int members = 0;
    for (int trial = 0; trial < 100; ++trial) {
        VecQ beta(3);
        for (int j = 0; j < 3; ++j) beta(j) = Rat(pick(gen));
        bool sat = true;
        for (int r = 0; r < rows.rows() && sat; ++r) {
            Rat s(0);
            for (int j = 0; j < L.m; ++j) s += rows(r, j) * beta(j);
            if (s < 0) sat = false;
        }
        if (sat) ++members;
        CHECK(conic_membership(open_cone.generators, beta) == sat);
    }
    CHECK(members > 0);

    // a single-ray star is the meet of the action and ray half-spaces
    StarShape one_ray;
    one_ray.rays.push_back(vq({"1"}));
    const DualCone wedge = dual_cone(half, one_ray);
    const MatQ wrows = dual_cone_inequalities(half, one_ray);
    CHECK(wrows.rows() == 2);
    for (int trial = 0; trial < 100; ++trial) {
        VecQ beta(2);
        for (int j = 0; j < 2; ++j) beta(j) = Rat(pick(gen));
        bool sat = beta(0) >= 0 && beta(1) >= 0;
        CHECK(conic_membership(wedge.generators, beta) == sat);
    }

    RelLattice big;
    big.m = 9;
    big.w0 = VecQ(9);
    for (int i = 0; i < 9; ++i) big.w0(i) = Rat(1);
    big.boundary = MatQ(0, 9);
    CHECK_THROWS_AS(dual_cone(big, StarShape{}), DimensionTooLarge);
}

TEST_CASE("profile comparison along an injective page-one map") {
    const Rat hb(1, 2);
    const FloerTypeComplex k1 = pair_complex("1/2", hb);
    const FloerTypeComplex k2 = pair_complex("1", hb);
    const SpectralSequenceState s1 = compute_pages(k1, suggested_r_max(k1));
    const SpectralSequenceState s2 = compute_pages(k2, suggested_r_max(k2));

    const NovMat id = nov_identity(2);
    const MonotonicityResult same = check_monotonicity(s1, s1, id);
    CHECK(same.holds);
    CHECK(same.tau1 == same.tau2);

    const MonotonicityResult mono = check_monotonicity(s1, s2, id);
    CHECK(mono.holds);
    CHECK(mono.tau1 == ExtRat(parse_rat("1/2")));
    CHECK(mono.tau2 == ExtRat(Rat(1)));
    CHECK(!check_monotonicity(s2, s1, id).holds);

    // a collapsing second state bounds everything
    const FloerTypeComplex flat = pair_complex("inf", hb);
    const SpectralSequenceState sf = compute_pages(flat, 1);
    const MonotonicityResult vac = check_monotonicity(s1, sf, id);
    CHECK(vac.holds);
    CHECK(vac.tau2.is_inf());

    NovMat crushed = nov_identity(2);
    crushed(1, 1) = Novikov();
    CHECK_THROWS_AS(check_monotonicity(s1, s2, crushed), MapNotInjective);

    // valuation-positive entries do not rescue injectivity on residues
    NovMat thin = nov_identity(2);
    thin(1, 1) = Novikov::monomial(parse_rat("1/2"));
    CHECK_THROWS_AS(check_monotonicity(s1, s2, thin), MapNotInjective);

    CHECK_THROWS_AS(check_monotonicity(s1, s2, nov_identity(3)), SchemaError);

    // a map dropping theta-lattice level is rejected before rank checks
    const FloerTypeComplex shifted = pair_complex("1", hb, {hb, hb});
    const SpectralSequenceState ss = compute_pages(shifted, suggested_r_max(shifted));
    CHECK_THROWS_AS(check_monotonicity(s1, ss, id), SchemaError);
}
