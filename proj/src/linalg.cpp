#include "novarch/linalg.hpp"

#include <set>

#include "novarch/errors.hpp"

namespace novarch {

// --- matrix helpers ---------------------------------------------------------

NovMat matmul(const NovMat& a, const NovMat& b) {
    if (a.cols() != b.rows()) throw Error("matmul: shape mismatch");
    NovMat out = nov_zero(a.rows(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j)
        for (Eigen::Index k = 0; k < a.cols(); ++k) {
            if (b(k, j).is_zero() && b(k, j).is_exact()) continue;
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                out(i, j) += a(i, k) * b(k, j);
        }
    return out;
}

NovVec matvec(const NovMat& a, const NovVec& v) {
    if (a.cols() != v.size()) throw Error("matvec: shape mismatch");
    NovVec out(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i) = Novikov();
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        if (v(k).is_zero() && v(k).is_exact()) continue;
        for (Eigen::Index i = 0; i < a.rows(); ++i) out(i) += a(i, k) * v(k);
    }
    return out;
}

NovMat pick_cols(const NovMat& m, const std::vector<int>& idx) {
    NovMat out = nov_zero(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = m(i, idx[j]);
    return out;
}

NovMat hcat(const NovMat& a, const NovMat& b) {
    if (a.rows() != b.rows()) throw Error("hcat: row mismatch");
    NovMat out = nov_zero(a.rows(), a.cols() + b.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = a(i, j);
    for (Eigen::Index j = 0; j < b.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, a.cols() + j) = b(i, j);
    return out;
}

ExtRat column_val(const NovMat& m, Eigen::Index j) {
    ExtRat v = ExtRat::infinity();
    for (Eigen::Index i = 0; i < m.rows(); ++i) v = ext_min(v, m(i, j).val());
    return v;
}

bool is_zero_mat(const NovMat& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!m(i, j).is_zero()) return false;
    return true;
}

ExtRat matrix_val(const NovMat& m) {
    ExtRat v = ExtRat::infinity();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            v = ext_min(v, m(i, j).val());
    return v;
}

ExtRat matrix_precision(const NovMat& m) {
    ExtRat p = ExtRat::infinity();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            p = ext_min(p, m(i, j).precision());
    return p;
}

NovMat truncate_mat(const NovMat& m, const ExtRat& prec) {
    NovMat out = m;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out(i, j) = m(i, j).truncated(prec);
    return out;
}

NovMat normalize_map(const NovMat& m, const std::vector<Rat>& rowv, const std::vector<Rat>& colv) {
    NovMat out = m;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out(i, j) = m(i, j).shifted(rowv[i] - colv[j]);
    return out;
}

NovMat denormalize_map(const NovMat& m, const std::vector<Rat>& rowv, const std::vector<Rat>& colv) {
    NovMat out = m;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out(i, j) = m(i, j).shifted(colv[j] - rowv[i]);
    return out;
}

NovVec normalize_vec(const NovVec& v, const std::vector<Rat>& vals) {
    NovVec out = v;
    for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = v(i).shifted(vals[i]);
    return out;
}

NovVec denormalize_vec(const NovVec& v, const std::vector<Rat>& vals) {
    NovVec out = v;
    for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = v(i).shifted(-vals[i]);
    return out;
}

// --- valued bases -----------------------------------------------------------

int ValuedBasis::index_of(const std::string& name) const {
    for (size_t i = 0; i < gens.size(); ++i)
        if (gens[i].name == name) return static_cast<int>(i);
    return -1;
}

std::vector<Rat> ValuedBasis::valuations() const {
    std::vector<Rat> v;
    v.reserve(gens.size());
    for (auto& g : gens) v.push_back(g.valuation);
    return v;
}

void ValuedBasis::validate() const {
    std::set<std::string> seen;
    for (auto& g : gens) {
        if (g.name.empty()) throw SchemaError("generator with empty name");
        if (!seen.insert(g.name).second) throw SchemaError("duplicate generator name '" + g.name + "'");
    }
}

// --- greedy echelon reduction ----------------------------------------------

std::vector<int> Reduction::zero_cols() const {
    std::vector<int> out;
    for (size_t j = 0; j < pivot_row.size(); ++j)
        if (pivot_row[j] < 0) out.push_back(static_cast<int>(j));
    return out;
}

std::vector<int> Reduction::nonzero_cols() const {
    std::vector<int> out;
    for (size_t j = 0; j < pivot_row.size(); ++j)
        if (pivot_row[j] >= 0) out.push_back(static_cast<int>(j));
    return out;
}

namespace {

void col_axpy(NovMat& A, Eigen::Index dst, const Novikov& f, Eigen::Index src) {
    // A.col(dst) -= f * A.col(src)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        if (!A(i, src).is_zero()) A(i, dst) -= f * A(i, src);
}

void col_scale(NovMat& A, Eigen::Index c, const Novikov& u) {
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        if (!A(i, c).is_zero()) A(i, c) *= u;
}

} // namespace

Reduction greedy_reduce(const NovMat& m, const ReduceOpts& opts) {
    const Eigen::Index rows = m.rows(), cols = m.cols();
    Reduction red;
    red.R = m;
    red.E = nov_identity(cols);
    red.pivot_row.assign(cols, -1);
    NovMat& A = red.R;

    std::vector<std::uint8_t> row_taken(rows, 0);
    std::vector<std::uint8_t> col_done(cols, 0);

    if (opts.fixed_cols > 0) {
        if (static_cast<int>(opts.fixed_pivots.size()) != opts.fixed_cols)
            throw InvariantError("greedy_reduce: fixed_pivots size mismatch");
        for (int k = 0; k < opts.fixed_cols; ++k) {
            int p = opts.fixed_pivots[k];
            red.pivot_row[k] = p;
            red.order.push_back(k);
            col_done[k] = 1;
            if (p < 0) continue;
            row_taken[p] = 1;
            const Novikov& piv = A(p, k);
            if (piv.is_zero()) throw InvariantError("greedy_reduce: fixed pivot entry is zero");
            // Eliminate this pivot row from every free column.
            for (Eigen::Index j = opts.fixed_cols; j < cols; ++j) {
                if (A(p, j).is_zero()) continue;
                Novikov f = A(p, j) / piv;
                col_axpy(A, j, f, k);
                col_axpy(red.E, j, f, k);
                A(p, j) = Novikov();   // exact by construction of f
            }
        }
    }

    while (true) {
        // Globally minimal-valuation pivot among free columns / allowed rows.
        Eigen::Index bi = -1, bj = -1;
        ExtRat best = ExtRat::infinity();
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (row_taken[i]) continue;
            if (opts.allowed_rows && !(*opts.allowed_rows)[i]) continue;
            for (Eigen::Index j = 0; j < cols; ++j) {
                if (col_done[j] || A(i, j).is_zero()) continue;
                ExtRat v = A(i, j).val();
                if (v < best) { best = v; bi = i; bj = j; }
            }
        }
        if (bj < 0) break;

        // Normalize the pivot column so the pivot entry is exactly T^λ; all
        // subsequent eliminations against it are then exact monomial shifts.
        const Rat lam = A(bi, bj).leading_exp();
        Novikov unit = A(bi, bj).shifted(-lam);            // val-0 unit
        Novikov uinv = unit.inverse();
        col_scale(A, bj, uinv);
        col_scale(red.E, bj, uinv);
        A(bi, bj) = Novikov::monomial(lam);                // exact pivot

        col_done[bj] = 1;
        row_taken[bi] = 1;
        red.pivot_row[bj] = static_cast<int>(bi);
        red.order.push_back(static_cast<int>(bj));

        for (Eigen::Index j = 0; j < cols; ++j) {
            if (col_done[j] || A(bi, j).is_zero()) continue;
            Novikov f = A(bi, j).shifted(-lam);            // A(bi,j)/T^λ, exact
            col_axpy(A, j, f, bj);
            col_axpy(red.E, j, f, bj);
            A(bi, j) = Novikov();                          // exact cancellation
        }
    }
    return red;
}

std::pair<NovVec, NovVec> echelon_coords(const Reduction& red, const NovVec& v) {
    NovVec coords(red.R.cols());
    for (Eigen::Index j = 0; j < coords.size(); ++j) coords(j) = Novikov();
    NovVec res = v;
    for (int c : red.order) {
        int p = red.pivot_row[c];
        if (p < 0) continue;
        if (res(p).is_zero()) continue;
        // pivot entry is exactly T^λ
        Novikov coeff = res(p) / red.R(p, c);
        coords(c) = coeff;
        for (Eigen::Index i = 0; i < res.size(); ++i)
            if (!red.R(i, c).is_zero()) res(i) -= coeff * red.R(i, c);
        res(p) = Novikov();
    }
    return {coords, res};
}

SpanSolver::SpanSolver(const NovMat& cols) : cols_(cols), red_(greedy_reduce(cols)) {}

std::pair<NovVec, NovVec> SpanSolver::coords(const NovVec& v) const {
    auto [c, res] = echelon_coords(red_, v);
    NovVec orig(cols_.cols());
    for (Eigen::Index i = 0; i < orig.size(); ++i) orig(i) = Novikov();
    for (Eigen::Index i = 0; i < orig.size(); ++i)
        for (Eigen::Index j = 0; j < orig.size(); ++j)
            if (!red_.E(i, j).is_zero() && !c(j).is_zero()) orig(i) += red_.E(i, j) * c(j);
    return {orig, res};
}

ExtRat SpanSolver::dist_val(const NovVec& v) const {
    auto [c, res] = echelon_coords(red_, v);
    (void)c;
    ExtRat d = ExtRat::infinity();
    for (Eigen::Index i = 0; i < res.size(); ++i) d = ext_min(d, res(i).val_lb());
    return d;
}

bool SpanSolver::contains(const NovVec& v) const {
    auto [c, res] = echelon_coords(red_, v);
    (void)c;
    for (Eigen::Index i = 0; i < res.size(); ++i)
        if (!res(i).is_zero()) return false;
    return true;
}

int SpanSolver::rank() const {
    int r = 0;
    for (int p : red_.pivot_row)
        if (p >= 0) ++r;
    return r;
}

ExtRat dist_val_to_lattice(const NovMat& gens, const NovVec& v) {
    Reduction red = greedy_reduce(gens);
    auto [c, res] = echelon_coords(red, v);
    ExtRat d = ExtRat::infinity();
    for (Eigen::Index i = 0; i < res.size(); ++i) d = ext_min(d, res(i).val_lb());
    // Coordinates below valuation 0 cannot be matched by Λ_{≥0} multiples.
    for (Eigen::Index j = 0; j < c.size(); ++j) {
        if (c(j).is_zero()) continue;
        Novikov below;   // terms of c_j with exponent < 0
        for (auto& t : c(j).terms())
            if (t.exp < 0) below += Novikov::monomial(t.exp, t.coeff);
        if (below.is_zero()) continue;
        ExtRat colval = ExtRat::infinity();
        for (Eigen::Index i = 0; i < red.R.rows(); ++i) colval = ext_min(colval, red.R(i, j).val());
        d = ext_min(d, below.val() + colval);
    }
    return d;
}

bool lattice_contains(const NovMat& gens, const NovVec& v) {
    Reduction red = greedy_reduce(gens);
    auto [c, res] = echelon_coords(red, v);
    for (Eigen::Index i = 0; i < res.size(); ++i)
        if (!res(i).is_zero()) return false;
    for (Eigen::Index j = 0; j < c.size(); ++j) {
        if (c(j).is_zero()) continue;
        if (c(j).leading_exp() < 0) return false;
    }
    return true;
}

// --- operator norms ---------------------------------------------------------

OpNorm operator_norm_val_normalized(const NovMat& fhat) {
    OpNorm out;
    out.shift = matrix_val(fhat);
    out.norm = out.shift.is_inf() ? 0.0 : std::exp(-rat_double(out.shift.value()));
    return out;
}

OpNorm operator_norm_val(const NovMat& f, const ValuedBasis& target, const ValuedBasis& source) {
    return operator_norm_val_normalized(normalize_map(f, target.valuations(), source.valuations()));
}

// --- r-orthogonal complements ----------------------------------------------

RComplement r_orthogonal_complement(const NovMat& subspace, int ambient_dim) {
    RComplement out;
    out.subspace_red = greedy_reduce(subspace);
    std::vector<std::uint8_t> taken(ambient_dim, 0);
    for (int p : out.subspace_red.pivot_row)
        if (p >= 0) taken[p] = 1;
    for (int i = 0; i < ambient_dim; ++i)
        if (!taken[i]) out.complement_rows.push_back(i);
    out.basis = nov_zero(ambient_dim, static_cast<Eigen::Index>(out.complement_rows.size()));
    for (size_t j = 0; j < out.complement_rows.size(); ++j)
        out.basis(out.complement_rows[j], static_cast<Eigen::Index>(j)) = Novikov(1);
    return out;
}

bool r_inequality_holds(const RComplement& comp, const NovVec& v, const Rat& eps) {
    // Decompose v = w + c along span(subspace) ⊕ span(complement).
    const NovMat& W = comp.subspace_red.R;
    Eigen::Index n = v.size();
    std::vector<int> wcols = comp.subspace_red.nonzero_cols();
    NovMat frame = nov_zero(n, static_cast<Eigen::Index>(wcols.size()) + comp.basis.cols());
    for (size_t j = 0; j < wcols.size(); ++j) frame.col(j) = W.col(wcols[j]);
    for (Eigen::Index j = 0; j < comp.basis.cols(); ++j)
        frame.col(static_cast<Eigen::Index>(wcols.size()) + j) = comp.basis.col(j);
    SpanSolver solver(frame);
    auto [coords, res] = solver.coords(v);
    for (Eigen::Index i = 0; i < res.size(); ++i)
        if (!res(i).is_zero()) throw InvariantError("r_inequality_holds: frame does not span the ambient space");
    NovVec w(n), c(n);
    for (Eigen::Index i = 0; i < n; ++i) { w(i) = Novikov(); c(i) = Novikov(); }
    const Eigen::Index nw = static_cast<Eigen::Index>(wcols.size());
    for (Eigen::Index j = 0; j < frame.cols(); ++j) {
        if (coords(j).is_zero()) continue;
        NovVec& dst = (j < nw) ? w : c;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!frame(i, j).is_zero()) dst(i) += coords(j) * frame(i, j);
    }
    ExtRat vv = ExtRat::infinity(), wv = ExtRat::infinity(), cv = ExtRat::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        vv = ext_min(vv, v(i).val());
        wv = ext_min(wv, w(i).val());
        cv = ext_min(cv, c(i).val());
    }
    if (vv.is_inf()) return true;                      // v = 0: nothing to check
    ExtRat bound = ext_min(wv, cv) + ExtRat(eps);
    return ExtRat(vv.value()) < bound;
}

} // namespace novarch
