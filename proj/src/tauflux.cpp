#include "novarch/tauflux.hpp"

#include "novarch/errors.hpp"
#include "novarch/linalg.hpp"

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace novarch {
namespace {

using boost::multiprecision::mpz_int;

Rat dot(const VecQ& a, const VecQ& b) {
    Rat s(0);
    for (int i = 0; i < a.size(); ++i) s += a(i) * b(i);
    return s;
}

std::string vec_str(const VecQ& v) {
    std::string s = "(";
    for (int i = 0; i < v.size(); ++i) {
        if (i > 0) s += ", ";
        s += rat_str(v(i));
    }
    return s + ")";
}

std::string class_str(const ClassVec& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i > 0) s += ", ";
        s += std::to_string(a[i]);
    }
    return s + ")";
}

bool is_integer(const Rat& q) { return denominator(q) == 1; }

void check_class_size(const RelLattice& L, const ClassVec& alpha) {
    if (static_cast<int>(alpha.size()) != L.m)
        throw SchemaError("class " + class_str(alpha) + " has size " +
                          std::to_string(alpha.size()) + ", lattice rank is " +
                          std::to_string(L.m));
}

// Scales a nonzero rational vector to a primitive integer direction.
VecQ normalize_ray(const VecQ& r) {
    mpz_int den(1), num(0);
    for (int i = 0; i < r.size(); ++i) {
        den = lcm(den, denominator(r(i)));
        num = gcd(num, numerator(r(i)));
    }
    VecQ out = r;
    if (num < 0) num = -num;
    const Rat scale(den, num);
    for (int i = 0; i < out.size(); ++i) out(i) *= scale;
    return out;
}

bool is_zero_vec(const VecQ& v) {
    for (int i = 0; i < v.size(); ++i)
        if (v(i) != 0) return false;
    return true;
}

// Exact feasibility of {x >= 0 : A x = b}: phase-one simplex, Bland's rule.
bool lp_feasible(MatQ A, VecQ b) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    for (int i = 0; i < m; ++i) {
        if (b(i) < 0) {
            for (int j = 0; j < n; ++j) A(i, j) = -A(i, j);
            b(i) = -b(i);
        }
    }
    MatQ t(m, n + m + 1);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) t(i, j) = A(i, j);
        for (int j = 0; j < m; ++j) t(i, n + j) = Rat(i == j ? 1 : 0);
        t(i, n + m) = b(i);
    }
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;

    while (true) {
        int enter = -1;
        for (int j = 0; j < n + m && enter < 0; ++j) {
            Rat red(j >= n ? 1 : 0);
            for (int i = 0; i < m; ++i)
                if (basis[i] >= n) red -= t(i, j);
            if (red < 0) enter = j;
        }
        if (enter < 0) break;
        int leave = -1;
        Rat best(0);
        for (int i = 0; i < m; ++i) {
            if (!(t(i, enter) > 0)) continue;
            const Rat ratio = t(i, n + m) / t(i, enter);
            if (leave < 0 || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave < 0) break;  // objective bounded below; defensive
        const Rat piv = t(leave, enter);
        for (int j = 0; j <= n + m; ++j) t(leave, j) /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == leave) continue;
            const Rat f = t(i, enter);
            if (f == 0) continue;
            for (int j = 0; j <= n + m; ++j) t(i, j) -= f * t(leave, j);
        }
        basis[leave] = enter;
    }
    Rat obj(0);
    for (int i = 0; i < m; ++i)
        if (basis[i] >= n) obj += t(i, n + m);
    return obj == 0;
}

}  // namespace

void validate_rel_lattice(const RelLattice& L) {
    if (L.m < 0) throw SchemaError("lattice rank must be nonnegative");
    if (L.w0.size() != L.m)
        throw SchemaError("w0 has size " + std::to_string(L.w0.size()) +
                          ", lattice rank is " + std::to_string(L.m));
    if (L.boundary.cols() != L.m)
        throw SchemaError("boundary matrix has " + std::to_string(L.boundary.cols()) +
                          " columns, lattice rank is " + std::to_string(L.m));
    for (int i = 0; i < L.boundary.rows(); ++i)
        for (int j = 0; j < L.boundary.cols(); ++j)
            if (!is_integer(L.boundary(i, j)))
                throw SchemaError("boundary entry (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ") = " + rat_str(L.boundary(i, j)) +
                                  " is not an integer");
}

Rat w0_of(const RelLattice& L, const ClassVec& alpha) {
    check_class_size(L, alpha);
    Rat s(0);
    for (int i = 0; i < L.m; ++i) s += L.w0(i) * Rat(alpha[i]);
    return s;
}

VecQ boundary_of(const RelLattice& L, const ClassVec& alpha) {
    check_class_size(L, alpha);
    const int k = static_cast<int>(L.boundary.rows());
    VecQ g(k);
    for (int i = 0; i < k; ++i) {
        g(i) = Rat(0);
        for (int j = 0; j < L.m; ++j) g(i) += L.boundary(i, j) * Rat(alpha[j]);
    }
    return g;
}

Rat ell(const RelLattice& L, const ClassVec& alpha, const VecQ& v) {
    return w0_of(L, alpha) + dot(v, boundary_of(L, alpha));
}

bool convex_membership(const std::vector<VecQ>& points, const VecQ& v) {
    if (points.empty()) return false;
    const int k = static_cast<int>(v.size());
    const int n = static_cast<int>(points.size());
    MatQ A(k + 1, n);
    VecQ b(k + 1);
    for (int j = 0; j < n; ++j) {
        if (points[j].size() != k)
            throw SchemaError("point " + std::to_string(j) + " has size " +
                              std::to_string(points[j].size()) + ", expected " +
                              std::to_string(k));
        for (int i = 0; i < k; ++i) A(i, j) = points[j](i);
        A(k, j) = Rat(1);
    }
    for (int i = 0; i < k; ++i) b(i) = v(i);
    b(k) = Rat(1);
    return lp_feasible(A, b);
}

bool conic_membership(const std::vector<VecQ>& rays, const VecQ& v) {
    const int k = static_cast<int>(v.size());
    if (rays.empty()) return is_zero_vec(v);
    const int n = static_cast<int>(rays.size());
    MatQ A(k, n);
    for (int j = 0; j < n; ++j) {
        if (rays[j].size() != k)
            throw SchemaError("ray " + std::to_string(j) + " has size " +
                              std::to_string(rays[j].size()) + ", expected " +
                              std::to_string(k));
        for (int i = 0; i < k; ++i) A(i, j) = rays[j](i);
    }
    VecQ b = v;
    return lp_feasible(A, b);
}

FluxPolytope make_polytope(std::vector<VecQ> vertices) {
    if (vertices.empty()) throw SchemaError("polytope needs at least one vertex");
    const int k = static_cast<int>(vertices[0].size());
    for (const VecQ& v : vertices)
        if (v.size() != k) throw SchemaError("polytope vertices have mixed dimensions");
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        std::vector<VecQ> others;
        for (std::size_t j = 0; j < vertices.size(); ++j)
            if (j != i) others.push_back(vertices[j]);
        if (!others.empty() && convex_membership(others, vertices[i]))
            throw SchemaError("vertex " + vec_str(vertices[i]) +
                              " is a convex combination of the others");
    }
    FluxPolytope P;
    P.vertices = std::move(vertices);
    VecQ origin(k);
    for (int i = 0; i < k; ++i) origin(i) = Rat(0);
    P.contains_origin = convex_membership(P.vertices, origin);
    return P;
}

bool point_in_polytope(const FluxPolytope& P, const VecQ& v) {
    return convex_membership(P.vertices, v);
}

bool cone_membership(const ClassVec& alpha, const FluxPolytope& P, const RelLattice& L) {
    const Rat c = w0_of(L, alpha);
    const VecQ g = boundary_of(L, alpha);
    for (const VecQ& v : P.vertices)
        if (c + dot(v, g) < 0) return false;
    return true;
}

ConeRingElement cone_ring_element(const std::map<ClassVec, Rat>& terms,
                                  const FluxPolytope& P, const RelLattice& L) {
    ConeRingElement x;
    for (const auto& [cls, coeff] : terms) {
        if (coeff == 0) continue;
        if (!cone_membership(cls, P, L)) {
            const Rat c = w0_of(L, cls);
            const VecQ g = boundary_of(L, cls);
            for (const VecQ& v : P.vertices)
                if (c + dot(v, g) < 0)
                    throw ClassOutsideCone("class " + class_str(cls) +
                                           " has pairing " + rat_str(c + dot(v, g)) +
                                           " < 0 at vertex " + vec_str(v));
        }
        x.terms[cls] = coeff;
    }
    return x;
}

ConeRingElement ring_add(const ConeRingElement& a, const ConeRingElement& b) {
    ConeRingElement out = a;
    for (const auto& [cls, coeff] : b.terms) {
        auto it = out.terms.find(cls);
        if (it == out.terms.end()) {
            out.terms[cls] = coeff;
        } else {
            it->second += coeff;
            if (it->second == 0) out.terms.erase(it);
        }
    }
    return out;
}

ConeRingElement ring_mul(const ConeRingElement& a, const ConeRingElement& b) {
    ConeRingElement out;
    for (const auto& [ca, qa] : a.terms) {
        for (const auto& [cb, qb] : b.terms) {
            if (ca.size() != cb.size())
                throw SchemaError("ring elements over lattices of different rank");
            ClassVec sum(ca.size());
            for (std::size_t i = 0; i < ca.size(); ++i) sum[i] = ca[i] + cb[i];
            auto it = out.terms.find(sum);
            if (it == out.terms.end()) {
                out.terms[sum] = qa * qb;
            } else {
                it->second += qa * qb;
            }
        }
    }
    for (auto it = out.terms.begin(); it != out.terms.end();) {
        if (it->second == 0)
            it = out.terms.erase(it);
        else
            ++it;
    }
    return out;
}

Novikov specialize(const ConeRingElement& x, const VecQ& v, const FluxPolytope& P,
                   const RelLattice& L) {
    if (!point_in_polytope(P, v))
        throw PointOutsidePolytope("specialization point " + vec_str(v) +
                                   " is outside the polytope");
    Novikov out;
    for (const auto& [cls, coeff] : x.terms)
        out += Novikov::monomial(ell(L, cls, v), coeff);
    return out;
}

ExtRat PLConcaveFunction::eval(const VecQ& v) const {
    if (pieces.empty()) return ExtRat::infinity();
    Rat best = pieces[0].first + dot(v, pieces[0].second);
    for (std::size_t i = 1; i < pieces.size(); ++i) {
        const Rat val = pieces[i].first + dot(v, pieces[i].second);
        if (val < best) best = val;
    }
    return ExtRat(best);
}

int PLConcaveFunction::argmin_piece(const VecQ& v) const {
    if (pieces.empty()) return -1;
    int arg = 0;
    Rat best = pieces[0].first + dot(v, pieces[0].second);
    for (std::size_t i = 1; i < pieces.size(); ++i) {
        const Rat val = pieces[i].first + dot(v, pieces[i].second);
        if (val < best) {
            best = val;
            arg = static_cast<int>(i);
        }
    }
    return arg;
}

PLConcaveFunction tau_eval(const std::vector<ClassVec>& classes, const FluxPolytope& P,
                           const RelLattice& L) {
    PLConcaveFunction f;
    f.domain = P;
    for (const ClassVec& alpha : classes) {
        check_class_size(L, alpha);
        const bool zero = std::all_of(alpha.begin(), alpha.end(),
                                      [](long a) { return a == 0; });
        if (zero) continue;  // the zero class is the constant +infinity
        const Rat c = w0_of(L, alpha);
        const VecQ g = boundary_of(L, alpha);
        for (const VecQ& v : P.vertices)
            if (c + dot(v, g) < 0)
                throw ClassOutsideCone("class " + class_str(alpha) + " has pairing " +
                                       rat_str(c + dot(v, g)) + " < 0 at vertex " +
                                       vec_str(v));
        f.pieces.emplace_back(c, g);
    }
    return f;
}

StarShape star_of(const FluxPolytope& P) {
    StarShape s;
    s.points = P.vertices;
    return s;
}

MatQ dual_cone_inequalities(const RelLattice& L, const StarShape& star) {
    validate_rel_lattice(L);
    const int k = static_cast<int>(L.boundary.rows());
    std::vector<VecQ> rows;
    rows.push_back(L.w0);
    const auto pairing_row = [&](const VecQ& v) {
        if (v.size() != k)
            throw SchemaError("star direction " + vec_str(v) + " has size " +
                              std::to_string(v.size()) + ", expected " + std::to_string(k));
        VecQ row(L.m);
        for (int j = 0; j < L.m; ++j) {
            row(j) = Rat(0);
            for (int i = 0; i < k; ++i) row(j) += v(i) * L.boundary(i, j);
        }
        return row;
    };
    for (const VecQ& p : star.points) rows.push_back(L.w0 + pairing_row(p));
    for (const VecQ& r : star.rays) rows.push_back(pairing_row(r));
    for (const VecQ& f : star.full_lines) {
        const VecQ row = pairing_row(f);
        rows.push_back(row);
        rows.push_back(-row);
    }
    MatQ out(static_cast<int>(rows.size()), L.m);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < L.m; ++j) out(static_cast<int>(i), j) = rows[i](j);
    return out;
}

DualCone dual_cone(const RelLattice& L, const StarShape& star) {
    validate_rel_lattice(L);
    if (L.m > 8)
        throw DimensionTooLarge("dual cone enumeration capped at rank 8, got " +
                                std::to_string(L.m));
    const MatQ ineq = dual_cone_inequalities(L, star);

    // Double description from the full space, one halfspace at a time.
    std::vector<VecQ> rays;
    for (int i = 0; i < L.m; ++i) {
        VecQ e(L.m);
        for (int j = 0; j < L.m; ++j) e(j) = Rat(0);
        e(i) = Rat(1);
        rays.push_back(e);
        rays.push_back(-e);
    }
    const auto push_unique = [](std::vector<VecQ>& list, const VecQ& r) {
        if (is_zero_vec(r)) return;
        const VecQ n = normalize_ray(r);
        for (const VecQ& q : list)
            if (q == n) return;
        list.push_back(n);
    };
    for (int row = 0; row < ineq.rows(); ++row) {
        VecQ a(L.m);
        for (int j = 0; j < L.m; ++j) a(j) = ineq(row, j);
        std::vector<VecQ> keep, plus, minus;
        std::vector<Rat> pval, mval;
        for (const VecQ& r : rays) {
            const Rat s = dot(a, r);
            if (s > 0) {
                plus.push_back(r);
                pval.push_back(s);
            } else if (s < 0) {
                minus.push_back(r);
                mval.push_back(s);
            } else {
                push_unique(keep, r);
            }
        }
        for (const VecQ& r : plus) push_unique(keep, r);
        for (std::size_t p = 0; p < plus.size(); ++p)
            for (std::size_t q = 0; q < minus.size(); ++q)
                push_unique(keep, pval[p] * minus[q] - mval[q] * plus[p]);
        rays = std::move(keep);
    }

    // Prune to a minimal generating set, deterministically.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < rays.size(); ++i) {
            std::vector<VecQ> others;
            for (std::size_t j = 0; j < rays.size(); ++j)
                if (j != i) others.push_back(rays[j]);
            if (conic_membership(others, rays[i])) {
                rays.erase(rays.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
    std::sort(rays.begin(), rays.end(), [](const VecQ& a, const VecQ& b) {
        for (int i = 0; i < a.size(); ++i) {
            if (a(i) < b(i)) return true;
            if (b(i) < a(i)) return false;
        }
        return false;
    });

    DualCone out;
    out.generators = std::move(rays);
    out.boundary_vanishes = true;
    for (const VecQ& g : out.generators) {
        VecQ bg(static_cast<int>(L.boundary.rows()));
        for (int i = 0; i < L.boundary.rows(); ++i) {
            bg(i) = Rat(0);
            for (int j = 0; j < L.m; ++j) bg(i) += L.boundary(i, j) * g(j);
        }
        if (!is_zero_vec(bg)) out.boundary_vanishes = false;
    }
    return out;
}

MonotonicityResult check_monotonicity(const SpectralSequenceState& s1,
                                      const SpectralSequenceState& s2,
                                      const NovMat& page_one_map) {
    const FloerTypeComplex& c1 = s1.source;
    const FloerTypeComplex& c2 = s2.source;
    if (page_one_map.rows() != c1.size() || page_one_map.cols() != c2.size())
        throw SchemaError("page-one map is " + std::to_string(page_one_map.rows()) + " x " +
                          std::to_string(page_one_map.cols()) + ", expected " +
                          std::to_string(c1.size()) + " x " + std::to_string(c2.size()));
    const NovMat normalized =
        normalize_map(page_one_map, c1.relative_valuation, c2.relative_valuation);
    for (int i = 0; i < normalized.rows(); ++i)
        for (int j = 0; j < normalized.cols(); ++j)
            if (normalized(i, j).val() < ExtRat(Rat(0)))
                throw SchemaError("map entry (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ") does not respect the theta lattices");
    NovMat residue = nov_zero(normalized.rows(), normalized.cols());
    for (int i = 0; i < residue.rows(); ++i)
        for (int j = 0; j < residue.cols(); ++j)
            residue(i, j) = Novikov(normalized(i, j).coeff_at(Rat(0)));
    const int rank = SpanSolver(residue).rank();
    if (rank != page_one_map.cols())
        throw MapNotInjective("page-one residue has rank " + std::to_string(rank) +
                              " on " + std::to_string(page_one_map.cols()) + " columns");

    MonotonicityResult out;
    out.tau1 = tau_from_ss(s1);
    out.tau2 = tau_from_ss(s2);
    out.holds = !(out.tau2 < out.tau1);
    return out;
}

}  // namespace novarch
