#include "novarch/models.hpp"

#include "novarch/errors.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <utility>

namespace novarch {

namespace {

std::string xname(int i) { return "x" + std::to_string(i); }

void add_term(Polyvector& out, PolyKey k, const Novikov& c) {
    if (c.is_zero()) return;
    auto it = out.find(k);
    if (it == out.end()) {
        out.emplace(std::move(k), c);
        return;
    }
    it->second += c;
    if (it->second.is_zero()) out.erase(it);
}

// Koszul sign of moving theta_T past theta_S into ascending order: one minus
// sign per pair (s, t) in S x T with s > t.
int koszul_inversions(unsigned s, unsigned t) {
    int inv = 0;
    for (int j = 0; j < 32; ++j)
        if (t >> j & 1u) inv += std::popcount(s >> (j + 1));
    return inv;
}

}  // namespace

CP1Model cp1_model(const Rat& r, int N, const ExtRat& precision) {
    if (!(Rat(0) < r && r < Rat(1)))
        throw SchemaError("model parameter r must lie strictly between 0 and 1");
    if (N < 4) throw SchemaError("model truncation N must be at least 4");

    CP1Model m;
    m.r = r;
    m.N = N;

    const Rat rho = r < Rat(1) - r ? r : Rat(1) - r;  // min(r, 1-r)
    Rat gap = Rat(1) - 2 * r;
    if (gap < 0) gap = -gap;

    FloerTypeComplex& c = m.complex;
    c.basis.z2_graded = true;
    for (int i = 0; i <= N; ++i) c.basis.gens.push_back({xname(i), 0, Rat(0)});
    for (int i = 0; i + 2 <= N; ++i)
        c.basis.gens.push_back({xname(i) + "dx", 1, Rat(0)});
    const int n = c.size();

    c.d = nov_zero(n, n);
    m.d0_part = nov_zero(n, n);
    m.delta_part = nov_zero(n, n);
    for (int i = 0; i + 2 <= N; ++i) {
        const int col = N + 1 + i;
        c.d(i, col) = Novikov::monomial(r);
        c.d(i + 2, col) = Novikov::monomial(Rat(1) - r);
        m.d0_part(i, col) = c.d(i, col);
        m.delta_part(i + 2, col) = c.d(i + 2, col);
    }

    // Both scales coincide at r = 1/2; keep the gap positive so the split is
    // well formed (it is then realized by the entry-position matrices above).
    c.hbar = gap == 0 ? Rat(1, 2) : gap;
    c.relative_valuation.assign(n, Rat(0));
    for (int i = 0; i + 2 <= N; ++i) c.relative_valuation[N + 1 + i] = rho;
    c.outside.assign(n, 0);
    c.precision = precision;

    m.diagnostic_rel.assign(n, Rat(0));
    for (int i = 0; i <= N; ++i) m.diagnostic_rel[i] = Rat(i) * r;
    for (int i = 0; i + 2 <= N; ++i) m.diagnostic_rel[N + 1 + i] = Rat(i + 1) * r;

    require_valid(c);
    return m;
}

int PolyKey::degree() const { return std::popcount(mask); }

Rat PolyvectorBV::key_val(const PolyKey& k) const {
    Rat v = 0;
    for (int i = 0; i < n; ++i) {
        const long ai = k.a[i] < 0 ? -k.a[i] : k.a[i];
        v -= Rat(ai) * log_radii[i];
    }
    return v;
}

ExtRat PolyvectorBV::valuation(const Polyvector& x) const {
    ExtRat v = ExtRat::infinity();
    for (const auto& [k, c] : x) {
        const ExtRat cv = c.val_lb();
        if (cv.is_inf()) continue;
        v = ext_min(v, ExtRat(cv.value() + key_val(k)));
    }
    return v;
}

Polyvector PolyvectorBV::delta(const Polyvector& x) const {
    Polyvector out;
    for (const auto& [k, c] : x) {
        if (static_cast<int>(k.a.size()) != n)
            throw SchemaError("monomial dimension does not match the model");
        int pos = 0;
        for (int i = 0; i < n; ++i) {
            if (!(k.mask >> i & 1u)) continue;
            ++pos;
            if (k.a[i] == 0) continue;
            const Rat f = pos % 2 ? Rat(k.a[i]) : -Rat(k.a[i]);
            add_term(out, PolyKey{k.a, k.mask & ~(1u << i)}, c.scaled(f));
        }
    }
    return out;
}

Polyvector PolyvectorBV::product(const Polyvector& x, const Polyvector& y) const {
    Polyvector out;
    for (const auto& [kx, cx] : x)
        for (const auto& [ky, cy] : y) {
            if (kx.mask & ky.mask) continue;
            PolyKey k;
            k.a.resize(n);
            for (int i = 0; i < n; ++i) k.a[i] = kx.a[i] + ky.a[i];
            k.mask = kx.mask | ky.mask;
            Novikov t = cx * cy;
            if (koszul_inversions(kx.mask, ky.mask) % 2) t = -t;
            add_term(out, std::move(k), t);
        }
    return out;
}

Polyvector PolyvectorBV::bracket(const Polyvector& x, const Polyvector& y) const {
    Polyvector out = delta(product(x, y));
    out = poly_sub(out, product(delta(x), y));
    // the (-1)^{|x|} x delta(y) term, from the homogeneous parts of x
    Polyvector xeven, xodd;
    for (const auto& [k, c] : x) (k.degree() % 2 ? xodd : xeven)[k] = c;
    const Polyvector dy = delta(y);
    out = poly_sub(out, product(xeven, dy));
    out = poly_add(out, product(xodd, dy));
    return out;
}

std::vector<PolyKey> PolyvectorBV::carrier() const {
    std::vector<PolyKey> keys;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<long> a(n, -N);
        while (true) {
            keys.push_back({a, mask});
            int i = n - 1;
            while (i >= 0 && a[i] == N) a[i--] = -N;
            if (i < 0) break;
            ++a[i];
        }
    }
    return keys;
}

PolyvectorBV polyannulus_bv(int n, const std::vector<Rat>& radii, int N) {
    if (n < 1) throw SchemaError("polyannulus dimension must be positive");
    if (n > 20) throw SchemaError("polyannulus dimension too large for the bitmask carrier");
    if (N < 1) throw SchemaError("polyannulus exponent bound must be positive");
    if (static_cast<int>(radii.size()) != n)
        throw SchemaError("one log-radius per factor is required");
    for (const Rat& rho : radii)
        if (rho < 0) throw SchemaError("log-radii must be nonnegative");

    PolyvectorBV B{n, radii, N};
    const std::vector<PolyKey> keys = B.carrier();
    const std::size_t stride = keys.size() <= 20000 ? 1 : keys.size() / 20000 + 1;
    for (std::size_t idx = 0; idx < keys.size(); idx += stride) {
        const PolyKey& k = keys[idx];
        const Polyvector x = poly_monomial(k, Novikov(1));
        const Polyvector dx = B.delta(x);
        if (k.degree() == 0 && !dx.empty())
            throw InvariantError("divergence does not vanish on a function");
        for (const auto& [k2, c2] : dx) {
            (void)c2;
            if (k2.degree() != k.degree() - 1)
                throw InvariantError("divergence does not lower polyvector degree by one");
        }
        if (B.valuation(dx) < B.valuation(x))
            throw InvariantError("divergence is not norm non-increasing");
        if (!B.delta(dx).empty())
            throw InvariantError("divergence does not square to zero");
    }
    return B;
}

Polyvector poly_monomial(const PolyKey& k, const Novikov& c) {
    Polyvector out;
    if (!c.is_zero()) out.emplace(k, c);
    return out;
}

Polyvector poly_add(const Polyvector& x, const Polyvector& y) {
    Polyvector out = x;
    for (const auto& [k, c] : y) add_term(out, k, c);
    return out;
}

Polyvector poly_sub(const Polyvector& x, const Polyvector& y) {
    Polyvector out = x;
    for (const auto& [k, c] : y) add_term(out, k, -c);
    return out;
}

Polyvector poly_scale(const Polyvector& x, const Novikov& c) {
    Polyvector out;
    for (const auto& [k, v] : x) add_term(out, k, v * c);
    return out;
}

bool poly_is_zero(const Polyvector& x) {
    for (const auto& [k, c] : x) {
        (void)k;
        if (!c.is_zero()) return false;
    }
    return true;
}

Polyvector upsilon_eval(const PolyvectorBV& B, const Polyvector& v,
                        const std::vector<Polyvector>& args) {
    for (const Polyvector& x : args)
        for (const auto& [k, c] : x) {
            (void)c;
            if (k.degree() != 0)
                throw SchemaError("polyderivation arguments must be degree-0 elements");
        }
    Polyvector cur = v;
    for (const Polyvector& x : args) cur = B.bracket(cur, x);
    return cur;
}

namespace {

PolyKey random_key(std::mt19937_64& g, const PolyvectorBV& B, int degree) {
    PolyKey k;
    k.a.resize(B.n);
    for (int i = 0; i < B.n; ++i)
        k.a[i] = static_cast<long>(g() % (2 * B.N + 1)) - B.N;
    while (std::popcount(k.mask) < degree)
        k.mask |= 1u << (g() % B.n);
    return k;
}

Novikov random_coeff(std::mt19937_64& g) {
    long c = static_cast<long>(g() % 7) - 3;
    if (c == 0) c = 2;
    return Novikov::monomial(Rat(static_cast<long>(g() % 5), 4), Rat(c));
}

Polyvector random_poly(std::mt19937_64& g, const PolyvectorBV& B, int degree, int terms) {
    Polyvector out;
    for (int t = 0; t < terms; ++t)
        out = poly_add(out, poly_monomial(random_key(g, B, degree), random_coeff(g)));
    return out;
}

}  // namespace

GerstenhaberReport upsilon_report(const PolyvectorBV& B, std::uint64_t seed, int samples) {
    GerstenhaberReport rep;
    std::mt19937_64 g(seed);
    auto check = [&](bool ok, const char* tag) {
        ++rep.samples;
        if (!ok) {
            rep.ok = false;
            rep.failures.push_back(tag);
        }
    };
    const int deg2 = B.n >= 2 ? 2 : 1;
    for (int s = 0; s < samples; ++s) {
        const Polyvector f = random_poly(g, B, 0, 1 + g() % 2);
        const Polyvector x = random_poly(g, B, 0, 1 + g() % 2);
        const Polyvector y = random_poly(g, B, 0, 1 + g() % 2);
        const Polyvector v = random_poly(g, B, 1, 1 + g() % 2);
        const Polyvector w = random_poly(g, B, 1, 1 + g() % 2);
        const Polyvector u = random_poly(g, B, deg2, 1 + g() % 2);

        // base of the recursion: degree 0 evaluates to itself
        check(poly_is_zero(poly_sub(upsilon_eval(B, f, {}), f)), "identity on degree 0");

        if (deg2 == 2) {
            // derivation in each slot
            const Polyvector fx = B.product(f, x);
            Polyvector lhs = upsilon_eval(B, u, {fx, y});
            Polyvector rhs = poly_add(B.product(f, upsilon_eval(B, u, {x, y})),
                                      B.product(x, upsilon_eval(B, u, {f, y})));
            check(poly_is_zero(poly_sub(lhs, rhs)), "derivation in the first slot");
            lhs = upsilon_eval(B, u, {y, fx});
            rhs = poly_add(B.product(f, upsilon_eval(B, u, {y, x})),
                           B.product(x, upsilon_eval(B, u, {y, f})));
            check(poly_is_zero(poly_sub(lhs, rhs)), "derivation in the last slot");

            // alternating under slot swaps
            check(poly_is_zero(poly_add(upsilon_eval(B, u, {x, y}),
                                        upsilon_eval(B, u, {y, x}))),
                  "alternating");

            // wedge goes to the determinant pairing
            const Polyvector vw = B.product(v, w);
            lhs = upsilon_eval(B, vw, {x, y});
            rhs = poly_sub(B.product(upsilon_eval(B, v, {x}), upsilon_eval(B, w, {y})),
                           B.product(upsilon_eval(B, w, {x}), upsilon_eval(B, v, {y})));
            check(poly_is_zero(poly_sub(lhs, rhs)), "wedge to determinant pairing");
        }

        // bracket of vector fields goes to the commutator of derivations
        const Polyvector bvw = B.bracket(v, w);
        const Polyvector lhs = upsilon_eval(B, bvw, {x});
        const Polyvector rhs =
            poly_sub(upsilon_eval(B, v, {upsilon_eval(B, w, {x})}),
                     upsilon_eval(B, w, {upsilon_eval(B, v, {x})}));
        check(poly_is_zero(poly_sub(lhs, rhs)), "bracket to commutator");
    }
    return rep;
}

Polyvector logform_d(const PolyvectorBV& B, const Polyvector& h) {
    Polyvector out;
    for (const auto& [k, c] : h) {
        if (k.degree() != 0) throw SchemaError("potential must be a function");
        for (int i = 0; i < B.n; ++i) {
            if (k.a[i] == 0) continue;
            add_term(out, PolyKey{k.a, 1u << i}, c.scaled(Rat(k.a[i])));
        }
    }
    return out;
}

namespace {

std::string exponent_str(const std::vector<long>& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(a[i]);
    }
    return s + ")";
}

}  // namespace

LogFormSolution solve_exact_logform(const PolyvectorBV& B, const Polyvector& alpha) {
    std::map<std::vector<long>, std::map<int, Novikov>> comps;
    for (const auto& [k, c] : alpha) {
        if (k.degree() != 1)
            throw SchemaError("log 1-form must be a sum of dlog components");
        comps[k.a][std::countr_zero(k.mask)] = c;
    }

    LogFormSolution sol;
    for (const auto& [a, cs] : comps) {
        const bool azero = std::all_of(a.begin(), a.end(), [](long v) { return v == 0; });
        if (azero) {
            for (const auto& [i, c] : cs) add_term(sol.obstruction, PolyKey{a, 1u << i}, c);
            continue;
        }
        const auto& [pivot, cp] = *cs.begin();
        if (a[pivot] == 0)
            throw NotClosed("component z^" + exponent_str(a) + " dlog z_" +
                            std::to_string(pivot + 1) + " has zero exponent there");
        const Novikov ha = cp.scaled(Rat(1) / Rat(a[pivot]));
        // closedness = the coefficient vector is parallel to the exponent
        for (int i = 0; i < B.n; ++i) {
            const auto it = cs.find(i);
            const Novikov actual = it == cs.end() ? Novikov() : it->second;
            if (!(actual - ha.scaled(Rat(a[i]))).is_zero())
                throw NotClosed("components at z^" + exponent_str(a) +
                                " are not proportional to the exponent");
        }
        add_term(sol.h, PolyKey{a, 0u}, ha);
    }
    sol.exact = sol.obstruction.empty();
    return sol;
}

FloerTypeComplex random_floer_complex(std::uint64_t seed, int rank, const Rat& hbar,
                                      const Rat& beta_target) {
    if (rank < 0) throw SchemaError("rank must be nonnegative");
    if (hbar < 0) throw SchemaError("hbar must be nonnegative");

    FloerTypeComplex c;
    c.hbar = hbar;
    if (rank == 0) {
        c.d = nov_zero(0, 0);
        return c;
    }

    std::mt19937_64 g(seed);
    Rat target = beta_target < 0 ? Rat(0) : beta_target;
    if (target > 0 && target < hbar) target = hbar;  // bars in (0, hbar) cannot exist

    int pairs = rank >= 2 ? 1 + static_cast<int>(g() % static_cast<std::uint64_t>(rank / 2)) : 0;
    int frees = std::min(rank - 2 * pairs, static_cast<int>(g() % 3));
    if (pairs + frees == 0) frees = 1;

    // admissible bar lengths: 0, the target itself, and a few grid points of
    // [hbar, target]
    std::vector<Rat> lengths{Rat(0), target};
    for (int j = 0; j <= 3; ++j) {
        const Rat lam = hbar + (target - hbar) * Rat(j, 4);
        if (lam >= hbar && lam <= target) lengths.push_back(lam);
    }

    for (int i = 0; i < pairs; ++i) {
        const int deg = static_cast<int>(g() % 3) - 1;
        c.basis.gens.push_back({"y" + std::to_string(i), deg, Rat(0)});
        c.basis.gens.push_back({"x" + std::to_string(i), deg + 1, Rat(0)});
    }
    for (int i = 0; i < frees; ++i)
        c.basis.gens.push_back({"f" + std::to_string(i), static_cast<int>(g() % 4) - 1, Rat(0)});
    const int n = c.size();

    c.d = nov_zero(n, n);
    for (int i = 0; i < pairs; ++i) {
        const Rat lam = i == 0 ? target : lengths[g() % lengths.size()];
        c.d(2 * i + 1, 2 * i) = Novikov::monomial(lam);
    }

    // conjugate by same-degree transvections with exponents on the hbar grid
    const int sweeps = 2 + static_cast<int>(g() % 4);
    for (int s = 0; s < sweeps; ++s) {
        const int a = static_cast<int>(g() % n);
        std::vector<int> same;
        for (int b = 0; b < n; ++b)
            if (b != a && c.basis.gens[b].degree == c.basis.gens[a].degree) same.push_back(b);
        if (same.empty()) continue;
        const int b = same[g() % same.size()];
        const long coeffs[3] = {1, -1, -2};
        const Novikov f = Novikov::monomial(hbar * Rat(static_cast<long>(g() % 3)),
                                            Rat(coeffs[g() % 3]));
        for (int row = 0; row < n; ++row) c.d(row, b) -= f * c.d(row, a);
        for (int col = 0; col < n; ++col) c.d(a, col) += f * c.d(b, col);
    }

    c.relative_valuation.assign(n, Rat(0));
    c.outside.assign(n, 0);
    require_valid(c);
    return c;
}

}  // namespace novarch
