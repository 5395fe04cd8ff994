#include "novarch/hpt.hpp"

#include "novarch/errors.hpp"

#include <algorithm>

namespace novarch {

namespace {

int parity(int k) { return ((k % 2) + 2) % 2; }

// Per-degree frame of the echelon construction.  The columns of the block
// differential are reduced once; the frame [D'' | B' | C] then splits the
// degree into a coexact part D'' (paired with the image basis B' of the next
// degree: d D''_j = B'_j), the incoming image B', and homology
// representatives C, with span(D'') orthogonal to ker = span(B') + span(C).
struct DegreeFrame {
    std::vector<int> idx;          // global generator indices of the degree
    Reduction red;                 // reduction of the outgoing block
    std::vector<int> nz;           // nonzero (image-producing) columns
    NovMat Bp;                     // incoming image basis
    std::vector<int> bp_piv;
    NovMat C;                      // homology representatives
    std::vector<int> c_piv;
    NovMat Dpp;                    // coexact frame part, D''_j -> red.R nz col j
    std::vector<Rat> beta_contrib; // val(B'_{j, next}) - val(D''_j) per pairing
};

using FrameSet = std::map<int, DegreeFrame>;

FrameSet build_frames(const DegreeBlocks& blocks, const ExtRat& precision, int slack) {
    FrameSet frames;
    for (const auto& [k, dmat] : blocks.dmat) {
        DegreeFrame f;
        f.idx = blocks.idx.at(k);
        f.red = greedy_reduce(dmat);
        f.nz = f.red.nonzero_cols();
        frames.emplace(k, std::move(f));
    }

    for (auto& [k, f] : frames) {
        const int nk = static_cast<int>(f.idx.size());
        const int prev = blocks.z2 ? parity(k + 1) : k - 1;

        f.Bp = nov_zero(nk, 0);
        auto pit = frames.find(prev);
        if (pit != frames.end() && !pit->second.nz.empty()) {
            f.Bp = pick_cols(pit->second.red.R, pit->second.nz);
            for (int c : pit->second.nz) f.bp_piv.push_back(pit->second.red.pivot_row[c]);
        }

        const NovMat K = pick_cols(f.red.E, f.red.zero_cols());

        ReduceOpts o2;
        o2.fixed_cols = static_cast<int>(f.bp_piv.size());
        o2.fixed_pivots = f.bp_piv;
        const Reduction red2 = greedy_reduce(hcat(f.Bp, K), o2);
        std::vector<int> c_cols;
        for (int j = o2.fixed_cols; j < static_cast<int>(red2.pivot_row.size()); ++j)
            if (red2.pivot_row[j] >= 0) {
                c_cols.push_back(j);
                f.c_piv.push_back(red2.pivot_row[j]);
            }
        f.C = pick_cols(red2.R, c_cols);

        const NovMat Dp = pick_cols(f.red.E, f.nz);
        ReduceOpts o3;
        o3.fixed_cols = static_cast<int>(f.bp_piv.size() + f.c_piv.size());
        o3.fixed_pivots = f.bp_piv;
        o3.fixed_pivots.insert(o3.fixed_pivots.end(), f.c_piv.begin(), f.c_piv.end());
        std::vector<std::uint8_t> no_rows(nk, 0);
        o3.allowed_rows = &no_rows;
        const Reduction red3 = greedy_reduce(hcat(hcat(f.Bp, f.C), Dp), o3);
        std::vector<int> d_cols;
        for (int j = o3.fixed_cols; j < static_cast<int>(red3.pivot_row.size()); ++j)
            d_cols.push_back(j);
        f.Dpp = pick_cols(red3.R, d_cols);

        for (std::size_t j = 0; j < f.nz.size(); ++j) {
            const ExtRat rv = column_val(f.red.R, f.nz[j]);
            const ExtRat dv = column_val(f.Dpp, static_cast<Eigen::Index>(j));
            if (rv.is_inf() || dv.is_inf())
                throw InvariantError("degenerate frame column in retract construction");
            const Rat contrib = rv.value() - dv.value();
            if (precision.is_finite() && contrib >= precision.value() - slack)
                throw PrecisionExhausted("boundary depth candidate " + rat_str(contrib) +
                                         " is within " + std::to_string(slack) +
                                         " of the working precision " + precision.str());
            f.beta_contrib.push_back(contrib);
        }
    }
    return frames;
}

Rat beta_of(const FrameSet& frames) {
    Rat beta = 0;
    for (const auto& [k, f] : frames)
        for (const Rat& c : f.beta_contrib) beta = std::max(beta, c);
    return beta;
}

Rat depth_def_impl(const ValuedBasis& basis, const NovMat& normalized_d, const ExtRat& precision,
                   int slack) {
    const DegreeBlocks blocks = degree_blocks(basis, normalized_d);
    const ExtRat prec = ext_min(precision, matrix_precision(normalized_d));
    return beta_of(build_frames(blocks, prec, slack));
}

void check_degree_plus_one(const ValuedBasis& basis, const NovMat& m, const char* what) {
    const int n = basis.size();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (m(j, i).is_zero()) continue;
            const int from = basis.gens[i].degree, to = basis.gens[j].degree;
            const bool ok =
                basis.z2_graded ? parity(to) == parity(from + 1) : to == from + 1;
            if (!ok)
                throw GradingMismatch(std::string(what) + " is not of degree +1 at " +
                                      basis.gens[i].name + " -> " + basis.gens[j].name);
        }
}

}  // namespace

Rat boundary_depth_def(const ReducedComplex& c, int slack) {
    return depth_def_impl(c.basis, c.d0_norm(), c.precision, slack);
}

Rat boundary_depth_def(const FloerTypeComplex& c, int slack) {
    return depth_def_impl(c.basis, c.d_norm(), c.precision, slack);
}

Rat boundary_depth_torsion(const ReducedComplex& c, int slack) {
    return homology_barcode(c, slack).max_torsion();
}

Rat boundary_depth_torsion(const FloerTypeComplex& c, int slack) {
    return homology_barcode(c, slack).max_torsion();
}

SDRData special_dr(const ReducedComplex& c) {
    const int n = c.size();
    const NovMat d0n = c.d0_norm();
    const DegreeBlocks blocks = degree_blocks(c.basis, d0n);
    const ExtRat prec = ext_min(c.precision, matrix_precision(d0n));
    FrameSet frames = build_frames(blocks, prec, 1);

    SDRData sdr;
    sdr.base = c;
    sdr.homology.z2_graded = c.basis.z2_graded;
    sdr.beta = beta_of(frames);

    // Global homology index base per degree.
    std::map<int, int> hbase;
    int hdim = 0;
    for (const auto& [k, f] : frames) {
        hbase[k] = hdim;
        hdim += static_cast<int>(f.C.cols());
        for (Eigen::Index j = 0; j < f.C.cols(); ++j) {
            const ExtRat v = column_val(f.C, j);
            if (v.is_inf()) throw InvariantError("zero homology representative");
            sdr.homology.gens.push_back(
                {"h" + std::to_string(k) + "_" + std::to_string(j), k, v.value()});
        }
    }

    sdr.i = nov_zero(n, hdim);
    sdr.p = nov_zero(hdim, n);
    sdr.h = nov_zero(n, n);

    // Full frame coordinates per degree: rows ordered [D'' | B' | C].
    std::map<int, NovMat> thetas;
    for (const auto& [k, f] : frames) {
        const int nk = static_cast<int>(f.idx.size());
        const int nf = static_cast<int>(f.Dpp.cols() + f.Bp.cols() + f.C.cols());
        NovMat theta = nov_zero(nf, nk);
        if (nk > 0) {
            const SpanSolver solver(hcat(hcat(f.Dpp, f.Bp), f.C));
            for (int l = 0; l < nk; ++l) {
                NovVec e(nk);
                for (int r = 0; r < nk; ++r) e(r) = Novikov();
                e(l) = Novikov(1);
                auto [coord, res] = solver.coords(e);
                for (Eigen::Index r = 0; r < res.size(); ++r)
                    if (!res(r).is_zero())
                        throw InvariantError("retract frame does not span its degree");
                for (int r = 0; r < nf; ++r) theta(r, l) = coord(r);
            }
        }
        thetas.emplace(k, std::move(theta));
    }

    for (const auto& [k, f] : frames) {
        const int nk = static_cast<int>(f.idx.size());
        const int nd = static_cast<int>(f.Dpp.cols());
        const int nb = static_cast<int>(f.Bp.cols());
        const int nc = static_cast<int>(f.C.cols());
        const NovMat& theta = thetas.at(k);

        for (int j = 0; j < nc; ++j)
            for (int r = 0; r < nk; ++r) sdr.i(f.idx[r], hbase[k] + j) = f.C(r, j);
        for (int j = 0; j < nc; ++j)
            for (int l = 0; l < nk; ++l) sdr.p(hbase[k] + j, f.idx[l]) = theta(nd + nb + j, l);

        // h sends the image basis B' of the next degree to its preimages D''
        // here: h-block = D'' · (B'-rows of the next frame's coordinates).
        const int nxt = blocks.z2 ? parity(k + 1) : k + 1;
        auto nit = frames.find(nxt);
        if (nit == frames.end() || nd == 0) continue;
        const DegreeFrame& g = nit->second;
        const NovMat& gtheta = thetas.at(nxt);
        const int ng = static_cast<int>(g.idx.size());
        const int gnd = static_cast<int>(g.Dpp.cols());
        for (int l = 0; l < ng; ++l)
            for (int j = 0; j < nd; ++j) {
                const Novikov& bc = gtheta(gnd + j, l);
                if (bc.is_zero() && bc.is_exact()) continue;
                for (int r = 0; r < nk; ++r)
                    if (!(f.Dpp(r, j).is_zero() && f.Dpp(r, j).is_exact()))
                        sdr.h(f.idx[r], g.idx[l]) += f.Dpp(r, j) * bc;
            }
    }

    // Exactness bookkeeping: the retract identities must hold modulo the
    // tracked precision by construction.
    const NovMat I = nov_identity(n);
    if (!is_zero_mat(matmul(d0n, sdr.i))) throw InvariantError("retract: d0 i != 0");
    if (!is_zero_mat(matmul(sdr.p, d0n))) throw InvariantError("retract: p d0 != 0");
    NovMat pi = matmul(sdr.p, sdr.i);
    for (int j = 0; j < hdim; ++j) pi(j, j) -= Novikov(1);
    if (!is_zero_mat(pi)) throw InvariantError("retract: p i != id");
    if (!is_zero_mat(matmul(sdr.h, sdr.i))) throw InvariantError("retract: h i != 0");
    if (!is_zero_mat(matmul(sdr.p, sdr.h))) throw InvariantError("retract: p h != 0");
    if (!is_zero_mat(matmul(sdr.h, sdr.h))) throw InvariantError("retract: h h != 0");
    NovMat homotopy = I - matmul(sdr.i, sdr.p) - matmul(d0n, sdr.h) - matmul(sdr.h, d0n);
    if (!is_zero_mat(homotopy)) throw InvariantError("retract: homotopy identity fails");

    return sdr;
}

NovMat normalized_perturbation(const FloerTypeComplex& c) {
    const ReducedComplex g = associated_graded(c);
    return c.d_norm() - g.d0_norm();
}

PerturbedSDR perturb(const SDRData& sdr, const NovMat& delta, std::optional<Rat> eps_in) {
    const int n = sdr.base.size();
    if (delta.rows() != n || delta.cols() != n)
        throw SchemaError("perturbation has wrong shape");
    check_degree_plus_one(sdr.base.basis, delta, "perturbation");

    PerturbedSDR out;
    out.beta = sdr.beta;
    out.delta_shift = matrix_val(delta);
    if (!(ExtRat(sdr.beta) < out.delta_shift))
        throw PerturbationTooLarge("perturbation norm e^-(" + out.delta_shift.str() +
                                   ") is not strictly below the homotopy bound e^-(" +
                                   rat_str(sdr.beta) + ")");

    if (eps_in) {
        out.eps = *eps_in;
        if (!(out.eps > 0)) throw InvariantError("eps must be positive");
        if (out.delta_shift.is_finite() && !(sdr.beta + 6 * out.eps < out.delta_shift.value()))
            throw InvariantError("eps margin too large: beta + 6 eps must stay below val(delta)");
    } else if (out.delta_shift.is_finite()) {
        out.eps = std::min(Rat(1, 100), Rat((out.delta_shift.value() - sdr.beta) / 7));
    } else {
        out.eps = Rat(1, 100);
    }

    const ExtRat in_prec = ext_min(
        ext_min(matrix_precision(delta), sdr.base.precision),
        ext_min(matrix_precision(sdr.i), ext_min(matrix_precision(sdr.p), matrix_precision(sdr.h))));
    const ExtRat ecut = in_prec.is_finite() ? in_prec : ExtRat(default_precision());
    // The homotopy h has valuation -beta, so a series tail dropped at T^s
    // resurfaces in h∘S∘h at s - 2β; running the series 2β deeper keeps every
    // output faithful modulo T^ecut.
    const ExtRat scut = ExtRat(ecut.value() + 2 * sdr.beta);

    // Each series term gains at least val(delta) - beta, so the count below
    // suffices to pass the truncation cutoff; exceeding it indicates a bug.
    int nmax = 16;
    if (out.delta_shift.is_finite()) {
        const Rat gain = out.delta_shift.value() - sdr.beta;
        const Rat steps = (scut.value() - out.delta_shift.value()) / gain;
        nmax = std::max(4, static_cast<int>(rat_double(steps)) + 4);
    }

    const NovMat A = matmul(delta, sdr.h);
    NovMat S = nov_zero(n, n);
    // Drops content at or beyond the cutoff, keeping entries exact when there
    // is nothing to drop (so exact nilpotent series terminate exactly).
    auto soft_truncate = [&](NovMat m) -> NovMat {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (!m(j, i).tail_from(scut.value()).is_zero())
                    m(j, i) = m(j, i).truncated(scut);
        return m;
    };
    NovMat term = delta;
    while (true) {
        // Exactness is decided before truncating: an exactly vanishing term
        // ends the series, while a term that merely has no visible part below
        // the cutoff ends it with a truncation mark.
        bool exact_zero = true, term_exact = true;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (!term(j, i).is_exact()) term_exact = false;
                if (!(term(j, i).is_zero() && term(j, i).is_exact())) exact_zero = false;
            }
        if (exact_zero) break;
        const NovMat tview = truncate_mat(term, scut);
        bool visible = false;
        for (int i = 0; i < n && !visible; ++i)
            for (int j = 0; j < n; ++j)
                if (!tview(j, i).is_zero()) {
                    visible = true;
                    break;
                }
        if (!visible) {
            out.series_truncated = true;
            break;
        }
        S += term_exact ? term : tview;
        ++out.series_terms;
        if (out.series_terms > nmax)
            throw SeriesDiverged("perturbation series exceeded " + std::to_string(nmax) +
                                 " terms without converging");
        term = soft_truncate(-matmul(A, term));
    }
    out.S = S;

    out.d_def = matmul(sdr.p, matmul(S, sdr.i));
    out.i1 = sdr.i - matmul(sdr.h, matmul(S, sdr.i));
    out.p1 = sdr.p - matmul(sdr.p, matmul(S, sdr.h));
    out.h1 = sdr.h - matmul(sdr.h, matmul(S, sdr.h));
    if (out.series_truncated) {
        // The dropped series tail perturbs every output beyond the cutoff.
        out.S = truncate_mat(out.S, ecut);
        out.d_def = truncate_mat(out.d_def, ecut);
        out.i1 = truncate_mat(out.i1, ecut);
        out.p1 = truncate_mat(out.p1, ecut);
        out.h1 = truncate_mat(out.h1, ecut);
    }
    // d_def is stored on the homology basis itself; its operator norm reads
    // off the valuation-normalized matrix.
    std::vector<Rat> hv(sdr.homology.gens.size());
    for (std::size_t j = 0; j < hv.size(); ++j) hv[j] = sdr.homology.gens[j].valuation;
    out.d_def_shift = matrix_val(normalize_map(out.d_def, hv, hv));
    if (out.d_def_shift < ExtRat(Rat(0)))
        throw InvariantError("induced differential has norm above 1");
    check_degree_plus_one(sdr.homology, out.d_def, "induced differential");

    out.precision = ext_min(
        ext_min(matrix_precision(out.d_def), matrix_precision(out.i1)),
        ext_min(matrix_precision(out.p1), matrix_precision(out.h1)));
    return out;
}

SDRCheckReport check_perturbed_sdr(const SDRData& sdr, const NovMat& delta,
                                   const PerturbedSDR& out) {
    SDRCheckReport rep;
    const int n = sdr.base.size();
    const int hdim = sdr.homology.size();
    const NovMat d = sdr.base.d0_norm() + delta;
    const NovMat I = nov_identity(n);

    auto expect_zero = [&rep](const NovMat& m, const std::string& tag) {
        if (is_zero_mat(m)) return;
        rep.ok = false;
        rep.failures.push_back(tag + " fails with residual valuation " + matrix_val(m).str());
    };

    NovMat pi = matmul(out.p1, out.i1);
    for (int j = 0; j < hdim; ++j) pi(j, j) -= Novikov(1);
    expect_zero(pi, "p1 i1 = id");
    expect_zero(matmul(d, out.i1) - matmul(out.i1, out.d_def), "d i1 = i1 d_def");
    expect_zero(matmul(out.p1, d) - matmul(out.d_def, out.p1), "p1 d = d_def p1");
    expect_zero(I - matmul(out.i1, out.p1) - matmul(d, out.h1) - matmul(out.h1, d),
                "id - i1 p1 = d h1 + h1 d");
    expect_zero(matmul(out.d_def, out.d_def), "d_def^2 = 0");
    expect_zero(matmul(out.h1, out.i1), "h1 i1 = 0");
    expect_zero(matmul(out.p1, out.h1), "p1 h1 = 0");
    expect_zero(matmul(out.h1, out.h1), "h1 h1 = 0");
    return rep;
}

PerturbedSDR perturb_complex(const FloerTypeComplex& c, std::optional<Rat> eps) {
    const ReducedComplex g = associated_graded(c);
    const SDRData sdr = special_dr(g);
    const NovMat delta = normalized_perturbation(c);
    PerturbedSDR out = perturb(sdr, delta, eps);
    // val(d_def) >= hbar always; strictness is inherited from the input: when
    // the higher-scale part sits strictly below e^{-hbar}, so does d_def.
    if (out.d_def_shift.is_finite()) {
        if (out.d_def_shift < ExtRat(c.hbar))
            throw InvariantError("induced differential has norm above e^-hbar");
        if (out.delta_shift.is_finite() && ExtRat(c.hbar) < out.delta_shift &&
            !(ExtRat(c.hbar) < out.d_def_shift))
            throw InvariantError("induced differential is not strictly below e^-hbar");
    }
    return out;
}

FloerTypeComplex perturbed_model(const SDRData& sdr, const PerturbedSDR& out) {
    FloerTypeComplex m;
    m.basis = sdr.homology;
    // d_def is already the matrix on the homology basis (not normalized).
    m.d = out.d_def;
    m.hbar = sdr.base.hbar;
    m.relative_valuation.assign(sdr.homology.gens.size(), Rat(0));
    m.outside.assign(sdr.homology.gens.size(), 0);
    m.precision = out.precision;
    return m;
}

}  // namespace novarch
