#include "novarch/rigidity.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <optional>
#include <sstream>

#include "novarch/linalg.hpp"

namespace novarch {

namespace {

MKey key_add(const MKey& a, const MKey& b) {
    MKey out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

// Relation scalar picked up when signed annulus exponents cancel: each factor
// contributes T^{g_s · overlap_s} with overlap = (|a|+|b|-|a+b|)/2.
Novikov overlap_scalar(const AffinoidModel& m, const MKey& a, const MKey& b) {
    Novikov c(1);
    if (m.kind != ModelKind::Polyannulus) return c;
    for (int s = 0; s < m.vars; ++s) {
        const int o = (std::abs(a[s]) + std::abs(b[s]) - std::abs(a[s] + b[s])) / 2;
        if (o > 0) c = c * Novikov::monomial(m.gaps[s] * o);
    }
    return c;
}

void insert_term(AlgElem& out, const MKey& k, const Novikov& c) {
    auto it = out.find(k);
    if (it == out.end()) {
        if (!c.is_zero()) out.emplace(k, c);
        return;
    }
    it->second += c;
    if (it->second.is_zero()) out.erase(it);
}

// All keys of the given signed/unsigned shape with total degree <= bound,
// ordered by total degree then lexicographically.
std::vector<MKey> enumerate_keys(int slots, int bound, bool allow_negative) {
    std::vector<MKey> out;
    MKey cur(slots, 0);
    std::function<void(int, int)> rec = [&](int slot, int left) {
        if (slot == slots) {
            out.push_back(cur);
            return;
        }
        for (int v = allow_negative ? -left : 0; v <= left; ++v) {
            cur[slot] = v;
            rec(slot + 1, left - std::abs(v));
        }
        cur[slot] = 0;
    };
    rec(0, bound);
    std::sort(out.begin(), out.end(), [](const MKey& a, const MKey& b) {
        const int da = key_degree(a), db = key_degree(b);
        if (da != db) return da < db;
        return a < b;
    });
    return out;
}

void check_key_shape(const AffinoidModel& m, const MKey& k, const char* where) {
    if (static_cast<int>(k.size()) != m.vars)
        throw SchemaError(std::string(where) + ": key " + key_str(k) + " has " +
                          std::to_string(k.size()) + " slots, model has " +
                          std::to_string(m.vars));
    if (key_degree(k) > m.degree)
        throw SchemaError(std::string(where) + ": key " + key_str(k) +
                          " exceeds truncation degree " + std::to_string(m.degree));
    if (m.kind != ModelKind::Polyannulus)
        for (int v : k)
            if (v < 0)
                throw SchemaError(std::string(where) + ": key " + key_str(k) +
                                  " has a negative exponent in a nonnegative carrier");
}

void check_elem(const AffinoidModel& m, const AlgElem& x, const char* where) {
    for (const auto& [k, c] : x) {
        check_key_shape(m, k, where);
        if (c.is_zero())
            throw SchemaError(std::string(where) + ": stored zero coefficient at " +
                              key_str(k));
    }
}

std::pair<MKey, MKey> ordered_pair(const MKey& a, const MKey& b) {
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

std::string pair_str(const MKey& a, const MKey& b) {
    return key_str(a) + "·" + key_str(b);
}

// Defect valuations must rise strictly; settle once the *correction*
// inv_ref·defect clears the modulus, i.e. val(defect) >= E - min(0, val(inv)).
struct SolveGuard {
    Rat stop;
    std::optional<Rat> prev;
    int steps = 0;

    // Returns true when the iteration should stop.
    bool settled(const ExtRat& v) {
        if (v.is_inf()) return true;
        if (v.value() >= stop) return true;
        if (prev && !(*prev < v.value()))
            throw IterationStalled("defect valuation " + v.str() +
                                   " did not rise above " + rat_str(*prev));
        prev = v.value();
        if (++steps > 10000) throw IterationStalled("step cap exceeded");
        return false;
    }
};

void check_gap_above(const ExtRat& gap, const Rat& bound, const std::string& what) {
    if (gap > ExtRat(bound)) return;
    throw NotClose("closeness gap " + gap.str() + " must exceed " + rat_str(bound) +
                   " (" + what + ")");
}

// Shared check ledger: isometry on the basis, |φ - id| margin, and the
// homomorphism identity on every key pair whose product stays in range.
void run_checks(const AffinoidModel& m, const ProductPerturbation& p, IsoReport& rep) {
    std::map<MKey, int> idx;
    for (size_t i = 0; i < rep.keys.size(); ++i) idx[rep.keys[i]] = static_cast<int>(i);

    rep.norm_preserving = true;
    rep.id_margin = ExtRat::infinity();
    for (size_t i = 0; i < rep.keys.size(); ++i) {
        const ExtRat vref = elem_val(rep.reference[i]);
        if (elem_val(rep.images[i]) != vref) rep.norm_preserving = false;
        const AlgElem diff = elem_sub(rep.images[i], rep.reference[i]);
        if (!elem_is_zero(diff))
            rep.id_margin = ext_min(rep.id_margin, elem_val(diff) - vref.value());
    }

    rep.multiplicative = true;
    rep.pairs_checked = 0;
    for (size_t i = 0; i < rep.keys.size(); ++i)
        for (size_t j = i; j < rep.keys.size(); ++j) {
            if (key_degree(rep.keys[i]) + key_degree(rep.keys[j]) > m.degree) continue;
            MKey sum = key_add(rep.keys[i], rep.keys[j]);
            Novikov scal(1);
            if (m.kind == ModelKind::Polyannulus)
                scal = overlap_scalar(m, rep.keys[i], rep.keys[j]);
            else if (m.kind == ModelKind::Inverted) {
                // Index keys carry one extra slot for the inverted power; the
                // exponent parts multiply additively just like the carrier.
            }
            const auto it = idx.find(sum);
            if (it == idx.end()) continue;  // unreachable for complete tables
            const AlgElem lhs = elem_scale(scal, rep.images[it->second]);
            const AlgElem rhs = star_mul(m, p, rep.images[i], rep.images[j]);
            ++rep.pairs_checked;
            if (!elem_congruent(lhs, rhs, m.precision)) rep.multiplicative = false;
        }
}

// Star-fold of an explicit factor list; the empty product is the star unit.
AlgElem star_fold(const AffinoidModel& m, const ProductPerturbation& p,
                  const std::vector<const AlgElem*>& factors, const AlgElem& unit) {
    if (factors.empty()) return unit;
    AlgElem acc = *factors[0];
    for (size_t i = 1; i < factors.size(); ++i) acc = star_mul(m, p, acc, *factors[i]);
    return acc;
}

// Exact reference inverse of an element with unit constant term: the
// geometric series in (c0 - f)/c0 terminates at the truncation degree.
AlgElem ref_inverse_unit(const AffinoidModel& m, const AlgElem& f) {
    const MKey zero(m.vars, 0);
    const auto c0 = f.find(zero);
    if (c0 == f.end() || c0->second.val() != ExtRat(Rat(0)))
        throw SchemaError("inverted element needs a constant term of valuation 0, got " +
                          elem_str(f));
    const Novikov c0inv = c0->second.inverse();
    AlgElem h = elem_scale(c0inv, elem_sub(elem_monomial(m, zero, c0->second), f));
    AlgElem acc = elem_one(m);
    AlgElem pw = elem_one(m);
    for (int k = 1; k <= m.degree; ++k) {
        pw = ref_mul(m, pw, h);
        if (elem_is_zero(pw)) break;
        acc = elem_add(acc, pw);
    }
    return elem_scale(c0inv, acc);
}

// --- matrix helpers for rectification --------------------------------------

bool mat_is_zero(const NovMat& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!m(i, j).is_zero()) return false;
    return true;
}

NovMat mat_sub(const NovMat& a, const NovMat& b) {
    NovMat out = nov_zero(a.rows(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = a(i, j) - b(i, j);
    return out;
}

// Isometry between orthonormal coordinate spaces: entries of valuation >= 0
// and an injective residue at T^0.
void check_isometry(const NovMat& m, const std::string& name) {
    NovMat residue = nov_zero(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (!m(i, j).is_zero() && m(i, j).val() < ExtRat(Rat(0)))
                throw SchemaError(name + " is not an isometry: entry (" +
                                  std::to_string(i) + "," + std::to_string(j) +
                                  ") has negative valuation " + m(i, j).val().str());
            residue(i, j) = Novikov(m(i, j).coeff_at(Rat(0)));
        }
    if (m.cols() == 0) return;
    if (SpanSolver(residue).rank() < static_cast<int>(m.cols()))
        throw SchemaError(name + " is not an isometry: residue at T^0 is not injective");
}

// Exact inverse of an injective-spanning (hence square) connecting map.
NovMat span_inverse(const NovMat& h, const std::string& name) {
    SpanSolver s(h);
    if (s.rank() < static_cast<int>(h.cols()))
        throw MapNotInjective(name + ": rank " + std::to_string(s.rank()) + " of " +
                              std::to_string(h.cols()) + " columns");
    if (s.rank() < static_cast<int>(h.rows()))
        throw ImageNotSpanning(name + ": rank " + std::to_string(s.rank()) +
                               " in ambient dimension " + std::to_string(h.rows()));
    NovMat inv = nov_zero(h.cols(), h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        NovVec e(h.rows());
        for (Eigen::Index r = 0; r < h.rows(); ++r) e(r) = Novikov();
        e(i) = Novikov(1);
        auto [coords, residual] = s.coords(e);
        for (Eigen::Index r = 0; r < residual.size(); ++r)
            if (!residual(r).is_zero())
                throw ImageNotSpanning(name + ": unit vector " + std::to_string(i) +
                                       " escapes the image");
        inv.col(i) = coords;
    }
    return inv;
}

} // namespace

// --- elements ---------------------------------------------------------------

int key_degree(const MKey& k) {
    int d = 0;
    for (int v : k) d += std::abs(v);
    return d;
}

std::string key_str(const MKey& k) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
    os << ")";
    return os.str();
}

std::string elem_str(const AlgElem& x) {
    if (x.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : x) {
        if (!first) os << " + ";
        first = false;
        os << "[" << c.str() << "]·z^" << key_str(k);
    }
    return os.str();
}

bool elem_is_zero(const AlgElem& x) { return x.empty(); }

ExtRat elem_val(const AlgElem& x) {
    ExtRat v = ExtRat::infinity();
    for (const auto& [k, c] : x) v = ext_min(v, c.val());
    return v;
}

AlgElem elem_add(AlgElem x, const AlgElem& y) {
    for (const auto& [k, c] : y) insert_term(x, k, c);
    return x;
}

AlgElem elem_sub(AlgElem x, const AlgElem& y) {
    for (const auto& [k, c] : y) insert_term(x, k, -c);
    return x;
}

AlgElem elem_scale(const Novikov& c, const AlgElem& x) {
    AlgElem out;
    if (c.is_zero()) return out;
    for (const auto& [k, v] : x) {
        Novikov t = c * v;
        if (!t.is_zero()) out.emplace(k, t);
    }
    return out;
}

bool elem_congruent(const AlgElem& x, const AlgElem& y, const Rat& prec) {
    const AlgElem d = elem_sub(x, y);
    return elem_is_zero(d) || elem_val(d) >= ExtRat(prec);
}

// --- models -----------------------------------------------------------------

int AffinoidModel::index_of(const MKey& k) const {
    for (size_t i = 0; i < basis.size(); ++i)
        if (basis[i] == k) return static_cast<int>(i);
    return -1;
}

AffinoidModel tate_model(int vars, int degree) {
    if (vars < 1) throw SchemaError("power-series model needs at least one generator");
    if (degree < 1) throw SchemaError("truncation degree must be at least 1");
    AffinoidModel m;
    m.kind = ModelKind::PowerSeries;
    m.vars = vars;
    m.degree = degree;
    m.precision = default_precision();
    m.basis = enumerate_keys(vars, degree, false);
    return m;
}

AffinoidModel polyannulus_model(const std::vector<std::pair<Rat, Rat>>& radii,
                                int degree) {
    if (radii.empty()) throw SchemaError("polyannulus needs at least one factor");
    if (degree < 1) throw SchemaError("truncation degree must be at least 1");
    AffinoidModel m;
    m.kind = ModelKind::Polyannulus;
    m.vars = static_cast<int>(radii.size());
    m.degree = degree;
    m.precision = default_precision();
    m.radii = radii;
    for (const auto& [r1, r2] : radii) {
        if (r1 <= 0 || r2 <= 0)
            throw SchemaError("annulus radii must be positive, got (" + rat_str(r1) +
                              ", " + rat_str(r2) + ")");
        m.gaps.push_back(r1 + r2);
    }
    m.basis = enumerate_keys(m.vars, degree, true);
    return m;
}

AffinoidModel laurent_model(int vars, int degree, const AlgElem& f, const Rat& r) {
    AffinoidModel m = tate_model(vars, degree);
    m.kind = ModelKind::Inverted;
    if (r <= 0) throw SchemaError("inversion depth r must be positive");
    check_elem(m, f, "inverted element");
    const MKey zero(vars, 0);
    const auto c0 = f.find(zero);
    if (c0 == f.end() || c0->second.val() != ExtRat(Rat(0)))
        throw SchemaError("inverted element needs a constant term of valuation 0");
    for (const auto& [k, c] : f)
        if (c.val() < ExtRat(Rat(0)))
            throw SchemaError("inverted element must have norm at most 1; coefficient at " +
                              key_str(k) + " has valuation " + c.val().str());
    m.f = f;
    m.r = r;
    return m;
}

AlgElem elem_one(const AffinoidModel& a) {
    AlgElem x;
    x.emplace(MKey(a.vars, 0), Novikov(1));
    return x;
}

AlgElem elem_monomial(const AffinoidModel& a, const MKey& k, const Novikov& c) {
    check_key_shape(a, k, "monomial");
    AlgElem x;
    if (!c.is_zero()) x.emplace(k, c);
    return x;
}

AlgElem ref_mul(const AffinoidModel& a, const AlgElem& x, const AlgElem& y) {
    AlgElem out;
    for (const auto& [kx, cx] : x)
        for (const auto& [ky, cy] : y) {
            const MKey k = key_add(kx, ky);
            if (key_degree(k) > a.degree) continue;
            insert_term(out, k, cx * cy * overlap_scalar(a, kx, ky));
        }
    return out;
}

AlgElem ref_pow(const AffinoidModel& a, const AlgElem& x, int k) {
    AlgElem acc = elem_one(a);
    for (int i = 0; i < k; ++i) acc = ref_mul(a, acc, x);
    return acc;
}

// --- perturbations ----------------------------------------------------------

const AlgElem& ProductPerturbation::entry(const MKey& a, const MKey& b) const {
    static const AlgElem zero;
    const auto it = table.find(ordered_pair(a, b));
    return it == table.end() ? zero : it->second;
}

ProductPerturbation perturbation_from_table(
    const AffinoidModel& a, std::map<std::pair<MKey, MKey>, AlgElem> table) {
    ProductPerturbation p;
    for (auto& [pq, e] : table) {
        check_key_shape(a, pq.first, "star table");
        check_key_shape(a, pq.second, "star table");
        check_elem(a, e, "star table value");
        const auto key = ordered_pair(pq.first, pq.second);
        const auto it = p.table.find(key);
        if (it == p.table.end()) {
            if (!elem_is_zero(e)) p.table.emplace(key, std::move(e));
        } else if (!elem_congruent(it->second, e, a.precision)) {
            throw SchemaError("star table is not commutative at " +
                              pair_str(pq.first, pq.second));
        }
    }

    // Closeness: every pair must satisfy val(a*b - ab) > val(ab); pairs whose
    // reference product vanishes must star to zero (|a*b| < c·0 is impossible).
    p.gap = ExtRat::infinity();
    for (size_t i = 0; i < a.basis.size(); ++i)
        for (size_t j = i; j < a.basis.size(); ++j) {
            const MKey &ki = a.basis[i], &kj = a.basis[j];
            const AlgElem ref =
                ref_mul(a, elem_monomial(a, ki), elem_monomial(a, kj));
            const AlgElem& star = p.entry(ki, kj);
            if (elem_is_zero(ref)) {
                if (!elem_is_zero(star))
                    throw NotClose("pair " + pair_str(ki, kj) +
                                   " has zero reference product but stars to " +
                                   elem_str(star));
                continue;
            }
            const AlgElem diff = elem_sub(star, ref);
            if (elem_is_zero(diff)) continue;
            const Rat margin = elem_val(diff).value() - elem_val(ref).value();
            if (margin <= 0)
                throw NotClose("star product at " + pair_str(ki, kj) +
                               " deviates at relative valuation " + rat_str(margin) +
                               "; need a positive gap (c < 1)");
            p.gap = ext_min(p.gap, ExtRat(margin));
        }

    // Associativity (with commutativity baked in) on every triple whose total
    // degree stays inside the carrier, mod T^precision.
    for (size_t i = 0; i < a.basis.size(); ++i)
        for (size_t j = i; j < a.basis.size(); ++j) {
            if (key_degree(a.basis[i]) + key_degree(a.basis[j]) > a.degree) continue;
            for (size_t k = j; k < a.basis.size(); ++k) {
                const MKey &ka = a.basis[i], &kb = a.basis[j], &kc = a.basis[k];
                if (key_degree(ka) + key_degree(kb) + key_degree(kc) > a.degree)
                    continue;
                const AlgElem ea = elem_monomial(a, ka);
                const AlgElem eb = elem_monomial(a, kb);
                const AlgElem ec = elem_monomial(a, kc);
                const AlgElem ab_c = star_mul(a, p, p.entry(ka, kb), ec);
                const AlgElem bc_a = star_mul(a, p, p.entry(kb, kc), ea);
                const AlgElem ca_b = star_mul(a, p, p.entry(kc, ka), eb);
                if (!elem_congruent(ab_c, bc_a, a.precision) ||
                    !elem_congruent(bc_a, ca_b, a.precision))
                    throw SchemaError("star table is not associative at " +
                                      key_str(ka) + "," + key_str(kb) + "," +
                                      key_str(kc));
            }
        }
    return p;
}

ProductPerturbation reference_perturbation(const AffinoidModel& a) {
    std::map<std::pair<MKey, MKey>, AlgElem> table;
    for (size_t i = 0; i < a.basis.size(); ++i)
        for (size_t j = i; j < a.basis.size(); ++j)
            table[{a.basis[i], a.basis[j]}] =
                ref_mul(a, elem_monomial(a, a.basis[i]), elem_monomial(a, a.basis[j]));
    return perturbation_from_table(a, std::move(table));
}

ProductPerturbation scaled_perturbation(const AffinoidModel& a, const AlgElem& w) {
    check_elem(a, w, "scaling unit");
    const AlgElem dev = elem_sub(w, elem_one(a));
    if (!elem_is_zero(dev) && !(elem_val(dev) > ExtRat(Rat(0))))
        throw SchemaError("scaling unit must be 1 + (positive valuation), got " +
                          elem_str(w));
    std::map<std::pair<MKey, MKey>, AlgElem> table;
    for (size_t i = 0; i < a.basis.size(); ++i)
        for (size_t j = i; j < a.basis.size(); ++j) {
            const AlgElem ref =
                ref_mul(a, elem_monomial(a, a.basis[i]), elem_monomial(a, a.basis[j]));
            if (elem_is_zero(ref)) continue;
            table[{a.basis[i], a.basis[j]}] = ref_mul(a, ref, w);
        }
    return perturbation_from_table(a, std::move(table));
}

ProductPerturbation conjugated_perturbation(const AffinoidModel& a,
                                            const std::map<MKey, AlgElem>& eta) {
    Rat margin;
    bool has = false;
    for (const auto& [k, e] : eta) {
        check_key_shape(a, k, "conjugation");
        check_elem(a, e, "conjugation value");
        if (elem_is_zero(e)) continue;
        if (!(elem_val(e) > ExtRat(Rat(0))))
            throw SchemaError("conjugation perturbation at " + key_str(k) +
                              " must have positive valuation");
        // Keys may not drop in degree, or the star of a truncated-away pair
        // could re-enter the carrier and break the closeness inequality.
        for (const auto& [ke, ce] : e)
            if (key_degree(ke) < key_degree(k))
                throw SchemaError("conjugation value at " + key_str(k) +
                                  " lowers the monomial degree (key " + key_str(ke) +
                                  ")");
        const Rat v = elem_val(e).value();
        margin = has ? std::min(margin, v) : v;
        has = true;
    }

    const auto eta_apply = [&](const AlgElem& x) {
        AlgElem out;
        for (const auto& [k, c] : x) {
            const auto it = eta.find(k);
            if (it == eta.end()) continue;
            out = elem_add(out, elem_scale(c, it->second));
        }
        return out;
    };
    const auto psi = [&](const AlgElem& x) { return elem_add(x, eta_apply(x)); };
    const auto psi_inv = [&](const AlgElem& y) {
        AlgElem x = y;
        const int cap = has ? 2 + static_cast<int>(rat_double(a.precision / margin)) : 1;
        for (int k = 0; k < cap; ++k) {
            AlgElem next = elem_sub(y, eta_apply(x));
            if (elem_congruent(next, x, a.precision)) return next;
            x = std::move(next);
        }
        throw IterationStalled("conjugation inverse did not settle");
    };

    std::map<std::pair<MKey, MKey>, AlgElem> table;
    for (size_t i = 0; i < a.basis.size(); ++i)
        for (size_t j = i; j < a.basis.size(); ++j) {
            const AlgElem prod = ref_mul(a, psi(elem_monomial(a, a.basis[i])),
                                         psi(elem_monomial(a, a.basis[j])));
            AlgElem star = psi_inv(prod);
            if (!elem_is_zero(star)) table[{a.basis[i], a.basis[j]}] = std::move(star);
        }
    return perturbation_from_table(a, std::move(table));
}

AlgElem star_mul(const AffinoidModel&, const ProductPerturbation& p,
                 const AlgElem& x, const AlgElem& y) {
    AlgElem out;
    for (const auto& [kx, cx] : x)
        for (const auto& [ky, cy] : y) {
            const AlgElem& e = p.entry(kx, ky);
            if (e.empty()) continue;
            const Novikov c = cx * cy;
            for (const auto& [k, v] : e) insert_term(out, k, c * v);
        }
    return out;
}

AlgElem star_solve(const AffinoidModel& a, const ProductPerturbation& p,
                   const AlgElem& lhs, const AlgElem& inv_ref,
                   const AlgElem& target, std::vector<ExtRat>* trace) {
    AlgElem x = ref_mul(a, inv_ref, target);
    Rat stop = a.precision;
    const ExtRat iv = elem_val(inv_ref);
    if (iv.is_finite() && iv.value() < 0) stop -= iv.value();
    SolveGuard guard{stop, std::nullopt, 0};
    for (;;) {
        const AlgElem defect = elem_sub(target, star_mul(a, p, lhs, x));
        const ExtRat v = elem_val(defect);
        if (trace) trace->push_back(v);
        if (guard.settled(v)) break;
        x = elem_add(x, ref_mul(a, inv_ref, defect));
    }
    // The solution is only pinned modulo the working modulus.
    AlgElem out;
    for (const auto& [k, c] : x) {
        const Novikov t = c.truncated(ExtRat(a.precision));
        if (!t.is_zero()) out.emplace(k, t);
    }
    return out;
}

AlgElem star_unit(const AffinoidModel& a, const ProductPerturbation& p,
                  std::vector<ExtRat>* trace) {
    const AlgElem one = elem_one(a);
    return star_solve(a, p, one, one, one, trace);
}

// --- rigidity isomorphisms --------------------------------------------------

IsoReport rigidity_iso_tate(const AffinoidModel& a, const ProductPerturbation& p) {
    if (a.kind != ModelKind::PowerSeries)
        throw SchemaError("rigidity_iso_tate expects a power-series model");
    check_gap_above(p.gap, Rat(0), "power-series rigidity needs c < 1");

    IsoReport rep;
    rep.gap = p.gap;
    std::vector<ExtRat> tr;
    const AlgElem unit = star_unit(a, p, &tr);
    rep.solved["unit"] = unit;
    rep.defect_traces["unit"] = tr;

    std::vector<AlgElem> gen;
    for (int s = 0; s < a.vars; ++s) {
        MKey k(a.vars, 0);
        k[s] = 1;
        gen.push_back(elem_monomial(a, k));
    }
    for (const MKey& k : a.basis) {
        std::vector<const AlgElem*> factors;
        for (int s = 0; s < a.vars; ++s)
            for (int t = 0; t < k[s]; ++t) factors.push_back(&gen[s]);
        rep.keys.push_back(k);
        rep.reference.push_back(elem_monomial(a, k));
        rep.images.push_back(star_fold(a, p, factors, unit));
    }
    run_checks(a, p, rep);
    return rep;
}

IsoReport rigidity_iso_polyannulus(const AffinoidModel& a,
                                   const ProductPerturbation& p) {
    if (a.kind != ModelKind::Polyannulus)
        throw SchemaError("rigidity_iso_polyannulus expects an annulus-product model");
    Rat bound(0);
    for (const Rat& g : a.gaps) bound = std::max(bound, g);
    check_gap_above(p.gap, bound, "annulus rigidity needs c < e^{-r1-r2} on every factor");

    IsoReport rep;
    rep.gap = p.gap;
    std::vector<ExtRat> tr;
    const AlgElem unit = star_unit(a, p, &tr);
    rep.solved["unit"] = unit;
    rep.defect_traces["unit"] = tr;

    // Per factor: keep the first edge generator, replace the second by the
    // solution of z1 * w2 = T^{r1+r2}·e, where e is the star unit (reference
    // inverse of z1 is T^{-g}·z2).  Hitting the star unit, not the reference
    // one, is what makes the fold map multiplicative across sign cancellation.
    std::vector<AlgElem> z1(a.vars), w2(a.vars);
    for (int s = 0; s < a.vars; ++s) {
        MKey plus(a.vars, 0), minus(a.vars, 0);
        plus[s] = 1;
        minus[s] = -1;
        z1[s] = elem_monomial(a, plus);
        const AlgElem inv = elem_monomial(a, minus, Novikov::monomial(-a.gaps[s]));
        const AlgElem target = elem_scale(Novikov::monomial(a.gaps[s]), unit);
        std::vector<ExtRat> st;
        w2[s] = star_solve(a, p, z1[s], inv, target, &st);
        const std::string name = "w2[" + std::to_string(s) + "]";
        rep.solved[name] = w2[s];
        rep.defect_traces[name] = st;
    }

    for (const MKey& k : a.basis) {
        std::vector<const AlgElem*> factors;
        for (int s = 0; s < a.vars; ++s)
            for (int t = 0; t < std::abs(k[s]); ++t)
                factors.push_back(k[s] > 0 ? &z1[s] : &w2[s]);
        rep.keys.push_back(k);
        rep.reference.push_back(elem_monomial(a, k));
        rep.images.push_back(star_fold(a, p, factors, unit));
    }
    run_checks(a, p, rep);
    return rep;
}

IsoReport rigidity_iso_annulus(const AffinoidModel& a, const ProductPerturbation& p) {
    if (a.kind != ModelKind::Polyannulus || a.vars != 1)
        throw SchemaError("rigidity_iso_annulus expects a single-factor annulus model");
    return rigidity_iso_polyannulus(a, p);
}

IsoReport rigidity_iso_laurent(const AffinoidModel& a, const ProductPerturbation& p) {
    if (a.kind != ModelKind::Inverted)
        throw SchemaError("rigidity_iso_laurent expects an inverted-element model");
    check_gap_above(p.gap, a.r, "inverted-element rigidity needs c < e^{-r}");

    IsoReport rep;
    rep.gap = p.gap;
    std::vector<ExtRat> tr;
    const AlgElem unit = star_unit(a, p, &tr);
    rep.solved["unit"] = unit;
    rep.defect_traces["unit"] = tr;

    // u is pinned by u * f = T^r; the reference solution is T^r·f^{-1}.
    const AlgElem f_inv = ref_inverse_unit(a, a.f);
    const AlgElem target = elem_monomial(a, MKey(a.vars, 0), Novikov::monomial(a.r));
    std::vector<ExtRat> ut;
    const AlgElem u = star_solve(a, p, a.f, f_inv, target, &ut);
    rep.solved["u"] = u;
    rep.defect_traces["u"] = ut;
    const AlgElem u_ref = elem_scale(Novikov::monomial(a.r), f_inv);

    std::vector<AlgElem> upow_ref{elem_one(a)};
    for (int j = 1; j <= a.degree; ++j)
        upow_ref.push_back(ref_mul(a, upow_ref.back(), u_ref));

    std::vector<AlgElem> gen;
    for (int s = 0; s < a.vars; ++s) {
        MKey k(a.vars, 0);
        k[s] = 1;
        gen.push_back(elem_monomial(a, k));
    }

    // Index keys (I, j): exponent vector plus the inverted power, total
    // degree within the truncation.
    for (const MKey& full : enumerate_keys(a.vars + 1, a.degree, false)) {
        const int j = full.back();
        MKey expo(full.begin(), full.end() - 1);
        std::vector<const AlgElem*> factors;
        for (int s = 0; s < a.vars; ++s)
            for (int t = 0; t < expo[s]; ++t) factors.push_back(&gen[s]);
        for (int t = 0; t < j; ++t) factors.push_back(&u);
        rep.keys.push_back(full);
        rep.reference.push_back(ref_mul(a, elem_monomial(a, expo), upow_ref[j]));
        rep.images.push_back(star_fold(a, p, factors, unit));
    }
    run_checks(a, p, rep);
    return rep;
}

// --- rectification ----------------------------------------------------------

RectifiedMap rectify_map(const NovMat& f, const NovMat& g, const NovMat& h0,
                         const NovMat& h1) {
    if (h0.cols() != f.cols() || g.cols() != h0.rows() || h1.rows() != g.rows() ||
        h1.cols() != f.rows())
        throw SchemaError("rectify_map: square has inconsistent shapes (f " +
                          std::to_string(f.rows()) + "x" + std::to_string(f.cols()) +
                          ", g " + std::to_string(g.rows()) + "x" +
                          std::to_string(g.cols()) + ", h0 " +
                          std::to_string(h0.rows()) + "x" + std::to_string(h0.cols()) +
                          ", h1 " + std::to_string(h1.rows()) + "x" +
                          std::to_string(h1.cols()) + ")");
    check_isometry(f, "f");
    check_isometry(g, "g");

    const NovMat base = matmul(g, h0);
    const NovMat defect = mat_sub(base, matmul(h1, f));

    RectifiedMap out;
    if (mat_is_zero(defect)) {
        // Already commuting: rectification is the identity on g.
        out.map = g;
        return out;
    }
    const ExtRat dval = matrix_val(defect);
    const ExtRat bval = matrix_val(base);
    if (bval.is_inf() || !(dval > bval))
        throw NotAlmostCommutative("defect valuation " + dval.str() +
                                   " is not strictly above val(g∘h0) = " + bval.str());
    out.commutation_defect = dval - bval.value();

    const NovMat h0_inv = span_inverse(h0, "h0");
    out.map = matmul(h1, matmul(f, h0_inv));

    if (!mat_is_zero(mat_sub(matmul(out.map, h0), matmul(h1, f))))
        throw InvariantError("rectified square fails to commute exactly");
    const NovMat dev = mat_sub(out.map, g);
    if (!mat_is_zero(dev)) {
        const ExtRat gval = matrix_val(g);
        const ExtRat dv = matrix_val(dev);
        if (gval.is_inf() || !(dv > gval))
            throw InvariantError("rectified map strays by valuation " + dv.str() +
                                 " against val(g) = " + gval.str());
        out.deviation = dv - gval.value();
    }
    return out;
}

RectifiedTransformation rectify_natural_transformation(const DiagramSpec& d) {
    if (d.objects < 1) throw SchemaError("diagram needs at least one object");
    if (static_cast<int>(d.transformation.size()) != d.objects)
        throw SchemaError("diagram has " + std::to_string(d.objects) +
                          " objects but " + std::to_string(d.transformation.size()) +
                          " transformation components");

    const auto arrow = [](int i, int j) {
        return std::to_string(i) + "->" + std::to_string(j);
    };
    for (const auto& [ij, h] : d.source_maps) {
        const auto [i, j] = ij;
        if (i < 0 || j < 0 || i >= d.objects || j >= d.objects || i == j)
            throw SchemaError("bad relation pair " + arrow(i, j));
        if (d.source_maps.count({j, i}))
            throw SchemaError("relation is not antisymmetric at " + arrow(i, j));
        if (!d.target_maps.count(ij))
            throw SchemaError("target diagram is missing the map " + arrow(i, j));
        const NovMat& k = d.target_maps.at(ij);
        if (h.rows() != d.transformation[j].cols() ||
            h.cols() != d.transformation[i].cols() ||
            k.rows() != d.transformation[j].rows() ||
            k.cols() != d.transformation[i].rows())
            throw SchemaError("maps at " + arrow(i, j) +
                              " do not match the component shapes");
    }
    for (const auto& [ij, k] : d.target_maps)
        if (!d.source_maps.count(ij))
            throw SchemaError("source diagram is missing the map " +
                              arrow(ij.first, ij.second));

    // Transitive closure must be present and both diagrams functorial on it.
    for (const auto& [ij, hij] : d.source_maps)
        for (const auto& [jk, hjk] : d.source_maps) {
            if (ij.second != jk.first) continue;
            const std::pair<int, int> ik{ij.first, jk.second};
            if (!d.source_maps.count(ik))
                throw SchemaError("relation is not transitively closed at " +
                                  arrow(ik.first, ik.second));
            if (!mat_is_zero(mat_sub(d.source_maps.at(ik), matmul(hjk, hij))))
                throw SchemaError("source diagram is not functorial along " +
                                  arrow(ij.first, ij.second) + "->" +
                                  std::to_string(jk.second));
            if (!mat_is_zero(mat_sub(d.target_maps.at(ik),
                                     matmul(d.target_maps.at(jk),
                                            d.target_maps.at(ij)))))
                throw SchemaError("target diagram is not functorial along " +
                                  arrow(ij.first, ij.second) + "->" +
                                  std::to_string(jk.second));
        }

    for (const auto& [ij, h] : d.source_maps)
        span_inverse(h, "structure map " + arrow(ij.first, ij.second));

    int initial = -1;
    for (int o = 0; o < d.objects && initial < 0; ++o) {
        bool ok = true;
        for (int i = 0; i < d.objects; ++i)
            if (i != o && !d.source_maps.count({o, i})) ok = false;
        if (ok) initial = o;
    }
    if (initial < 0)
        throw NoInitialObject("no object precedes all " + std::to_string(d.objects) +
                              " others");

    RectifiedTransformation out;
    out.initial = initial;
    out.maps.resize(d.objects);
    out.deviations.assign(d.objects, ExtRat::infinity());
    out.maps[initial] = d.transformation[initial];
    check_isometry(d.transformation[initial],
                   "transformation component " + std::to_string(initial));
    for (int i = 0; i < d.objects; ++i) {
        if (i == initial) continue;
        const RectifiedMap r =
            rectify_map(d.transformation[initial], d.transformation[i],
                        d.source_maps.at({initial, i}), d.target_maps.at({initial, i}));
        out.maps[i] = r.map;
        out.deviations[i] = r.deviation;
    }

    for (const auto& [ij, h] : d.source_maps)
        if (!mat_is_zero(mat_sub(matmul(out.maps[ij.second], h),
                                 matmul(d.target_maps.at(ij), out.maps[ij.first]))))
            throw InvariantError("rectified square at " + arrow(ij.first, ij.second) +
                                 " fails to commute");
    return out;
}

} // namespace novarch
