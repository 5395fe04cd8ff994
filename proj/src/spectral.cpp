#include "novarch/spectral.hpp"

#include "novarch/errors.hpp"
#include "novarch/linalg.hpp"
#include "novarch/snf.hpp"

#include <algorithm>
#include <utility>

namespace novarch {

namespace {

long rat_floor_long(const Rat& q) {
    using boost::multiprecision::mpz_int;
    mpz_int num = numerator(q), den = denominator(q);
    mpz_int fl;
    if (num >= 0)
        fl = num / den;
    else
        fl = -((-num + den - 1) / den);
    return fl.convert_to<long>();
}

long rat_ceil_long(const Rat& q) { return -rat_floor_long(-q); }

NovMat shift_cols_all(const NovMat& m, const Rat& s) {
    NovMat out = m;
    for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            if (!out(i, j).is_zero()) out(i, j) = out(i, j).shifted(s);
    return out;
}

NovVec shift_vec(const NovVec& v, const Rat& s) {
    NovVec out = v;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        if (!out(i).is_zero()) out(i) = out(i).shifted(s);
    return out;
}

NovVec mat_col(const NovMat& m, Eigen::Index j) {
    NovVec v(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) v(i) = m(i, j);
    return v;
}

// Per-degree data of the filtered differential in the relative frame.
struct DegData {
    int n = 0;
    bool has_out = false;
    NovMat B;       // outgoing block, n_next x n
    SNFResult snf;  // of B (only when has_out)
};

struct Tower {
    std::map<int, DegData> degs;
    bool z2 = false;
    Rat hbar;

    int next_deg(int k) const { return z2 ? (k + 1) % 2 : k + 1; }
    int prev_deg(int k) const { return z2 ? (k + 1) % 2 : k - 1; }

    int sval_count(int k) const {
        auto it = degs.find(k);
        return it != degs.end() && it->second.has_out ? it->second.snf.rank : 0;
    }

    // Basis of Z_r^{0,k} = {x in L_k : Bx in T^{r hbar} L_{k+1}} as columns:
    // V . diag(T^{max(0, r hbar - e_i)}), identity on kernel columns.
    NovMat zbasis(int k, int r) const {
        const DegData& d = degs.at(k);
        if (!d.has_out) return nov_identity(d.n);
        NovMat out = d.snf.V;
        for (int i = 0; i < d.snf.rank; ++i) {
            Rat z = Rat(r) * hbar - d.snf.exponents[i];
            if (z > 0)
                for (Eigen::Index row = 0; row < out.rows(); ++row)
                    if (!out(row, i).is_zero()) out(row, i) = out(row, i).shifted(z);
        }
        return out;
    }

    // Coordinates of v in the zbasis(k, r) lattice (exact inverse).
    NovVec zcoords(int k, int r, const NovVec& v) const {
        const DegData& d = degs.at(k);
        if (!d.has_out) return v;
        NovVec w = matvec(d.snf.Vinv, v);
        for (int i = 0; i < d.snf.rank; ++i) {
            Rat z = Rat(r) * hbar - d.snf.exponents[i];
            if (z > 0 && !w(i).is_zero()) w(i) = w(i).shifted(-z);
        }
        return w;
    }

    // B . Z_rho^{0,k} shifted by T^{extra}: columns Uinv_i . T^{extra + max(e_i, rho hbar)}.
    // Lands in degree next(k); empty when nothing flows out.
    NovMat a_image(int k, int rho, const Rat& extra) const {
        auto it = degs.find(k);
        int n_next = degs.count(next_deg(k)) ? degs.at(next_deg(k)).n : 0;
        if (it == degs.end() || !it->second.has_out) return nov_zero(n_next, 0);
        const SNFResult& s = it->second.snf;
        NovMat out(s.Uinv.rows(), s.rank);
        for (int i = 0; i < s.rank; ++i) {
            Rat e = s.exponents[i];
            Rat rh = Rat(rho) * hbar;
            Rat shift = extra + (e > rh ? e : rh);
            for (Eigen::Index row = 0; row < out.rows(); ++row)
                out(row, i) =
                    s.Uinv(row, i).is_zero() ? Novikov() : s.Uinv(row, i).shifted(shift);
        }
        return out;
    }

    // Boundary lattice inside Z_r^{0,k}: T^{hbar} Z_{r-1}^{0,k} plus the images
    // B(Z_{r-1}^{1-r, k-1}).
    NovMat w0(int k, int r) const {
        NovMat first = shift_cols_all(zbasis(k, r - 1), hbar);
        int kp = prev_deg(k);
        if (!degs.count(kp)) return first;
        return hcat(first, a_image(kp, r - 1, Rat(1 - r) * hbar));
    }

    // Boundary lattice inside Z_h^{h, next(k)} for the hop-h differential out
    // of degree k: Z_{h-1}^{h+1} plus B(Z_{h-1}^{1,k}).
    NovMat wtarget(int k, int h) const {
        int k1 = next_deg(k);
        NovMat first = shift_cols_all(zbasis(k1, h - 1), Rat(h + 1) * hbar);
        return hcat(first, a_image(k, h - 1, hbar));
    }
};

Tower build_tower(const FloerTypeComplex& c) {
    Tower t;
    t.hbar = c.hbar;
    const DegreeBlocks blocks = degree_blocks(c.basis, c.d_theta());
    t.z2 = blocks.z2;
    for (const auto& [k, idx] : blocks.idx) {
        DegData d;
        d.n = static_cast<int>(idx.size());
        const NovMat* b = blocks.block(k);
        if (b != nullptr && !is_zero_mat(*b)) {
            d.has_out = true;
            d.B = *b;
            d.snf = smith_normal_form(*b);
        }
        t.degs.emplace(k, std::move(d));
    }
    return t;
}

int certificate_hop_of(const Tower& t) {
    Rat e_max = 0;
    bool any = false;
    for (const auto& [k, d] : t.degs)
        if (d.has_out && d.snf.rank > 0) {
            any = true;
            e_max = std::max(e_max, d.snf.exponents.back(), std::less<Rat>());
        }
    if (!any) return 1;
    return static_cast<int>(rat_ceil_long(e_max / t.hbar)) + 1;
}

struct PresData {
    NovMat Zb;   // lattice basis of Z_r^{0,k}
    NovMat W;    // boundary sublattice generators
    SNFResult snf;  // of the relation matrix (coordinates of W in Zb)
};

}  // namespace

const PageBlock& SpectralSequenceState::block(int r, int k) const {
    static const PageBlock zero{};
    if (r < 1 || r > static_cast<int>(pages.size())) return zero;
    auto it = pages[r - 1].find(k);
    return it == pages[r - 1].end() ? zero : it->second;
}

bool SpectralSequenceState::collapsed_at_one() const {
    if (!certified_complete) return false;
    for (const PageDifferential& d : differentials)
        if (d.nonzero) return false;
    return true;
}

int suggested_r_max(const FloerTypeComplex& c) {
    require_valid(c);
    if (!(c.hbar > 0)) throw SchemaError("spectral sequence requires hbar > 0");
    Tower t = build_tower(c);
    return std::max(1, certificate_hop_of(t) - 1);
}

SpectralSequenceState compute_pages(const FloerTypeComplex& c, int r_max) {
    if (r_max < 1) throw SchemaError("r_max must be at least 1");
    require_valid(c);
    if (c.precision.is_finite() && !(Rat(r_max) * c.hbar < c.precision.value()))
        throw PrecisionExhausted("page horizon " + rat_str(Rat(r_max) * c.hbar) +
                                 " reaches the precision " + c.precision.str());

    SpectralSequenceState st;
    st.source = c;
    st.hbar = c.hbar;
    st.r_max = r_max;
    Tower t = build_tower(c);
    st.certificate_hop = certificate_hop_of(t);
    st.certified_complete = st.certificate_hop <= r_max + 1;
    st.pages.resize(r_max);
    st.differentials.resize(r_max);

    for (int r = 1; r <= r_max; ++r) {
        std::map<int, PresData> pres;
        for (const auto& [k, d] : t.degs) {
            if (d.n == 0) continue;
            PresData p;
            p.Zb = t.zbasis(k, r);
            p.W = t.w0(k, r);
            NovMat M(d.n, p.W.cols());
            for (Eigen::Index j = 0; j < p.W.cols(); ++j) {
                NovVec coords = t.zcoords(k, r, mat_col(p.W, j));
                for (Eigen::Index i = 0; i < d.n; ++i) {
                    if (coords(i).val() < ExtRat(Rat(0)))
                        throw InvariantError("boundary lattice escapes the cycle lattice at degree " +
                                             std::to_string(k));
                    M(i, j) = coords(i);
                }
            }
            p.snf = smith_normal_form(M);
            if (p.snf.rank != d.n)
                throw InvariantError("page presentation not fully torsion at degree " +
                                     std::to_string(k));
            PageBlock pb;
            for (const Rat& e : p.snf.exponents) {
                if (e > c.hbar)
                    throw InvariantError("page annihilator exceeds hbar at degree " +
                                         std::to_string(k));
                if (e == c.hbar)
                    ++pb.interval_rank;
                else if (e > 0)
                    pb.partial.push_back(e);
            }
            std::sort(pb.partial.begin(), pb.partial.end());
            st.pages[r - 1].emplace(k, pb);
            pres.emplace(k, std::move(p));
        }

        PageDifferential& dr = st.differentials[r - 1];
        dr.hop = r;
        for (const auto& [k, d] : t.degs) {
            if (!d.has_out || d.n == 0) continue;
            const PresData& p = pres.at(k);
            const int k1 = t.next_deg(k);
            const NovMat Wt = t.wtarget(k, r);
            const bool have_target = pres.count(k1) != 0;
            NovMat D;
            if (have_target) D = nov_zero(t.degs.at(k1).n, d.n);
            for (int i = 0; i < d.n; ++i) {
                if (p.snf.exponents[i] == 0) continue;  // already trivial on this page
                const NovVec g = matvec(p.Zb, mat_col(p.snf.Uinv, i));
                const NovVec v = matvec(d.B, g);
                if (have_target) {
                    NovVec pc = matvec(pres.at(k1).snf.U,
                                       t.zcoords(k1, r, shift_vec(v, -Rat(r) * c.hbar)));
                    for (Eigen::Index row = 0; row < pc.size(); ++row) D(row, i) = pc(row);
                }
                if (lattice_contains(Wt, v)) continue;
                const ExtRat tval = dist_val_to_lattice(Wt, v);
                const ExtRat sval = dist_val_to_lattice(p.W, g);
                if (tval.is_inf() || sval.is_inf())
                    throw InvariantError("page differential with indeterminate valuation at degree " +
                                         std::to_string(k));
                dr.nonzero = true;
                dr.val = ext_min(dr.val, ExtRat(tval.value() - sval.value()));
            }
            if (have_target) dr.blocks.emplace(k, std::move(D));
        }
        if (dr.nonzero)
            dr.page = static_cast<int>(rat_floor_long(dr.val.value() / c.hbar)) + 1;
    }

    ExtRat best = ExtRat::infinity();
    bool any = false;
    for (const PageDifferential& d : st.differentials)
        if (d.nonzero) {
            any = true;
            best = ext_min(best, d.val);
        }
    if (any) {
        // the scan is conclusive once every unscanned hop is either certified
        // zero or forced above the best value seen
        if (st.certified_complete || best <= ExtRat(Rat(r_max) * c.hbar)) {
            st.tau = best;
            st.first_nonzero_page =
                static_cast<int>(rat_floor_long(best.value() / c.hbar)) + 1;
        }
    } else if (st.certified_complete) {
        st.tau = ExtRat::infinity();
    }
    return st;
}

ExtRat tau_from_ss(const SpectralSequenceState& s) {
    if (s.tau.has_value()) return *s.tau;
    throw Inconclusive("no nonzero differential found and the certificate hop " +
                       std::to_string(s.certificate_hop) + " lies beyond the horizon r_max=" +
                       std::to_string(s.r_max));
}

// --- non-Hausdorff diagnostic ----------------------------------------------

std::string fate_name(ClassFate f) {
    switch (f) {
        case ClassFate::Bounded: return "BOUNDED";
        case ClassFate::Dying: return "DYING";
        case ClassFate::Diverges: return "DIVERGES";
    }
    return "BOUNDED";
}

HausdorffDiagnostic detect_hausdorff_failure(
    const std::function<FamilyMember(int)>& family, const std::vector<int>& sizes,
    const std::vector<std::string>& tracked, const Rat& threshold) {
    if (sizes.empty()) throw SchemaError("hausdorff diagnostic needs at least one size");
    if (tracked.empty()) throw SchemaError("hausdorff diagnostic needs tracked classes");

    HausdorffDiagnostic out;
    out.sizes = sizes;
    out.classes.resize(tracked.size());
    for (std::size_t j = 0; j < tracked.size(); ++j) out.classes[j].generator = tracked[j];

    for (int n : sizes) {
        const FamilyMember m = family(n);
        const FloerTypeComplex& c = m.complex;
        if (static_cast<int>(m.theta_lattice.size()) != c.size())
            throw SchemaError("theta lattice size does not match the member at size " +
                              std::to_string(n));
        const SpanSolver act(c.d);
        const SpanSolver th(normalize_map(c.d, m.theta_lattice, m.theta_lattice));
        for (std::size_t j = 0; j < tracked.size(); ++j) {
            const int idx = c.basis.index_of(tracked[j]);
            if (idx < 0)
                throw SchemaError("tracked generator '" + tracked[j] +
                                  "' missing at size " + std::to_string(n));
            // Both traces follow the class of the unit generator, each in the
            // frame whose distance it measures: the raw action frame, and the
            // lattice frame where the filtration becomes a power scale.
            NovVec e(c.size());
            for (int i = 0; i < c.size(); ++i) e(i) = Novikov();
            e(idx) = Novikov(1);
            out.classes[j].action_trace.push_back(act.dist_val(e));
            out.classes[j].theta_trace.push_back(th.dist_val(e));
        }
    }

    for (ClassTrace& tr : out.classes) {
        const auto& s = tr.action_trace;
        const auto& w = tr.theta_trace;
        tr.surviving = std::all_of(s.begin(), s.end(),
                                   [&](const ExtRat& v) { return v == s.front(); });
        bool strictly = true;
        for (std::size_t i = 1; i < w.size(); ++i)
            if (!(w[i] > w[i - 1])) strictly = false;
        tr.growing = w.size() > 1 && strictly && w.back() >= ExtRat(threshold);
        if (tr.surviving && tr.growing)
            tr.fate = ClassFate::Diverges;
        else if (s.back() > s.front())
            tr.fate = ClassFate::Dying;
        else
            tr.fate = ClassFate::Bounded;
        if (tr.fate == ClassFate::Diverges) out.diverges = true;
        if (tr.surviving) ++out.certified_rank;
    }
    return out;
}

// --- convergence hypotheses -------------------------------------------------

ConvergenceCheck check_convergence_hypotheses(
    const std::vector<OrbitDatum>& orbits, const std::optional<Rat>& kappa,
    const std::optional<std::pair<long, long>>& index_window,
    const std::optional<std::pair<Rat, Rat>>& slope_offset) {
    ConvergenceCheck out;
    if (!kappa.has_value()) {
        out.witness = "no proportionality constant between the relative classes was supplied";
        return out;
    }
    if (*kappa != 0) {
        if (!index_window.has_value()) {
            out.witness = "kappa != 0 requires an index window to check boundedness";
            return out;
        }
        out.proportional_case = true;
        for (const OrbitDatum& o : orbits)
            if (o.cz_index < index_window->first || o.cz_index > index_window->second) {
                out.proportional_case = false;
                out.witness = "orbit '" + o.name + "' has index " +
                              std::to_string(o.cz_index) + " outside the window";
                break;
            }
        out.converges = out.proportional_case;
        return out;
    }
    if (!slope_offset.has_value()) {
        out.witness = "kappa == 0 requires an action bound (slope, offset) in the index";
        return out;
    }
    out.index_bounded_case = true;
    for (const OrbitDatum& o : orbits) {
        const Rat bound =
            slope_offset->first * Rat(o.cz_index < 0 ? -o.cz_index : o.cz_index) +
            slope_offset->second;
        if (o.action > bound) {
            out.index_bounded_case = false;
            out.witness = "orbit '" + o.name + "' has action " + rat_str(o.action) +
                          " above the index bound " + rat_str(bound);
            break;
        }
    }
    out.converges = out.index_bounded_case;
    return out;
}

}  // namespace novarch
