#include "novarch/snf.hpp"

#include <algorithm>

#include "novarch/errors.hpp"
#include "novarch/linalg.hpp"

namespace novarch {

namespace {

void row_axpy(NovMat& A, Eigen::Index dst, const Novikov& f, Eigen::Index src) {
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        if (!A(src, j).is_zero()) A(dst, j) -= f * A(src, j);
}

void colm_axpy(NovMat& A, Eigen::Index dst, const Novikov& f, Eigen::Index src) {
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        if (!A(i, src).is_zero()) A(i, dst) -= f * A(i, src);
}

} // namespace

SNFResult smith_normal_form(const NovMat& m, const Rat& slack) {
    const Eigen::Index rows = m.rows(), cols = m.cols();
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            if (!m(i, j).is_zero() && m(i, j).leading_exp() < 0)
                throw InvariantError("smith_normal_form: entry with negative valuation at (" +
                                     std::to_string(i) + "," + std::to_string(j) + ")");

    const ExtRat floor = matrix_precision(m);

    SNFResult s;
    NovMat A = m;
    s.U = nov_identity(rows);
    s.Uinv = nov_identity(rows);
    s.V = nov_identity(cols);
    s.Vinv = nov_identity(cols);

    Eigen::Index k = 0;
    const Eigen::Index kmax = std::min(rows, cols);
    while (k < kmax) {
        // minimal-valuation pivot in the active submatrix
        Eigen::Index bi = -1, bj = -1;
        ExtRat best = ExtRat::infinity();
        for (Eigen::Index i = k; i < rows; ++i)
            for (Eigen::Index j = k; j < cols; ++j) {
                if (A(i, j).is_zero()) continue;
                ExtRat v = A(i, j).val();
                if (v < best) { best = v; bi = i; bj = j; }
            }
        if (bi < 0) break;
        if (floor.is_finite() && best.value() >= floor.value() - slack)
            throw PrecisionExhausted("SNF pivot valuation " + best.str() +
                                     " within slack " + rat_str(slack) +
                                     " of precision " + floor.str());

        if (bi != k) {
            A.row(bi).swap(A.row(k));
            s.U.row(bi).swap(s.U.row(k));
            s.Uinv.col(bi).swap(s.Uinv.col(k));
        }
        if (bj != k) {
            A.col(bj).swap(A.col(k));
            s.V.col(bj).swap(s.V.col(k));
            s.Vinv.row(bj).swap(s.Vinv.row(k));
        }

        // normalize pivot to exactly T^λ by a unit row scaling
        const Rat lam = A(k, k).leading_exp();
        Novikov unit = A(k, k).shifted(-lam);
        Novikov uinv = unit.inverse();
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!A(k, j).is_zero()) A(k, j) *= uinv;
        for (Eigen::Index j = 0; j < rows; ++j) {
            if (!s.U(k, j).is_zero()) s.U(k, j) *= uinv;
            if (!s.Uinv(j, k).is_zero()) s.Uinv(j, k) *= unit;
        }
        A(k, k) = Novikov::monomial(lam);

        // clear column k (rows below), then row k (columns right); the pivot
        // is an exact monomial, so the multipliers are exact shifts
        for (Eigen::Index i = k + 1; i < rows; ++i) {
            if (A(i, k).is_zero()) continue;
            Novikov f = A(i, k).shifted(-lam);
            row_axpy(A, i, f, k);
            row_axpy(s.U, i, f, k);
            for (Eigen::Index r2 = 0; r2 < rows; ++r2)
                if (!s.Uinv(r2, i).is_zero()) s.Uinv(r2, k) += f * s.Uinv(r2, i);
            A(i, k) = Novikov();
        }
        for (Eigen::Index j = k + 1; j < cols; ++j) {
            if (A(k, j).is_zero()) continue;
            Novikov g = A(k, j).shifted(-lam);
            colm_axpy(A, j, g, k);
            colm_axpy(s.V, j, g, k);
            for (Eigen::Index c2 = 0; c2 < cols; ++c2)
                if (!s.Vinv(j, c2).is_zero()) s.Vinv(k, c2) += g * s.Vinv(j, c2);
            A(k, j) = Novikov();
        }

        s.exponents.push_back(lam);
        ++k;
    }
    s.rank = static_cast<int>(s.exponents.size());
    s.zero_rank = static_cast<int>(kmax) - s.rank;
    for (size_t i = 1; i < s.exponents.size(); ++i)
        if (s.exponents[i] < s.exponents[i - 1])
            throw InvariantError("smith_normal_form: exponents not nondecreasing");
    return s;
}

NovMat snf_diagonal(const SNFResult& s, Eigen::Index rows, Eigen::Index cols) {
    NovMat d = nov_zero(rows, cols);
    for (size_t i = 0; i < s.exponents.size(); ++i)
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = Novikov::monomial(s.exponents[i]);
    return d;
}

Rat TorsionBarcode::max_torsion() const {
    Rat m(0);
    for (auto& [deg, bars] : torsion)
        for (auto& b : bars)
            if (b > m) m = b;
    return m;
}

TorsionBarcode homology_barcode_raw(const std::map<int, NovMat>& dmats,
                                    const std::map<int, int>& dims,
                                    bool z2, const Rat& slack) {
    auto dim_of = [&](int k) -> int {
        int kk = z2 ? ((k % 2) + 2) % 2 : k;
        auto it = dims.find(kk);
        return it == dims.end() ? 0 : it->second;
    };
    auto dmat_of = [&](int k) -> NovMat {
        int kk = z2 ? ((k % 2) + 2) % 2 : k;
        auto it = dmats.find(kk);
        if (it != dmats.end()) return it->second;
        return nov_zero(dim_of(k + 1), dim_of(k));
    };

    TorsionBarcode out;
    for (auto& [k, n] : dims) {
        out.torsion[k] = {};
        out.free_rank[k] = 0;
        if (n == 0) continue;
        NovMat dk = dmat_of(k);
        if (dk.cols() != n || dk.rows() != dim_of(k + 1))
            throw InvariantError("homology_barcode: dimension mismatch at degree " + std::to_string(k));

        // kernel combinations: transform columns of the zero columns; each has
        // an exact unit coordinate at its own index, so membership coordinates
        // can be read off directly
        Reduction rk = greedy_reduce(dk);
        std::vector<int> zc = rk.zero_cols();
        const int z = static_cast<int>(zc.size());

        // image basis in degree k from the previous differential
        NovMat dprev = dmat_of(k - 1);
        std::vector<int> imcols;
        Reduction rp;
        if (dprev.cols() > 0 && dprev.rows() == n) {
            rp = greedy_reduce(dprev);
            imcols = rp.nonzero_cols();
        }

        // express each image column in the kernel combinations
        NovMat Y = nov_zero(z, static_cast<Eigen::Index>(imcols.size()));
        for (size_t b = 0; b < imcols.size(); ++b) {
            NovVec col = rp.R.col(imcols[b]);
            NovVec rebuilt(n);
            for (int i = 0; i < n; ++i) rebuilt(i) = Novikov();
            for (int a = 0; a < z; ++a) {
                Novikov coord = col(zc[a]);     // unit coordinate readoff
                Y(a, static_cast<Eigen::Index>(b)) = coord;
                if (coord.is_zero()) continue;
                for (int i = 0; i < n; ++i)
                    if (!rk.E(i, zc[a]).is_zero()) rebuilt(i) += coord * rk.E(i, zc[a]);
            }
            for (int i = 0; i < n; ++i)
                if (!(col(i) - rebuilt(i)).is_zero())
                    throw NotAComplex("boundary outside the kernel at degree " + std::to_string(k) +
                                      ", coordinate " + std::to_string(i));
        }
        for (Eigen::Index j = 0; j < Y.cols(); ++j)
            for (Eigen::Index i = 0; i < Y.rows(); ++i)
                if (!Y(i, j).is_zero() && Y(i, j).leading_exp() < 0)
                    throw InvariantError("homology_barcode: negative-valuation kernel coordinate");

        SNFResult s = smith_normal_form(Y, slack);
        std::vector<Rat> bars;
        for (auto& e : s.exponents)
            if (e > 0) bars.push_back(e);
        std::sort(bars.begin(), bars.end());
        out.torsion[k] = std::move(bars);
        out.free_rank[k] = z - s.rank;
    }
    // Canonical form: a barcode is a multiset of bars, so degrees that
    // contribute nothing are not recorded at all.
    for (auto it = out.free_rank.begin(); it != out.free_rank.end();)
        it = (it->second == 0) ? out.free_rank.erase(it) : std::next(it);
    for (auto it = out.torsion.begin(); it != out.torsion.end();)
        it = it->second.empty() ? out.torsion.erase(it) : std::next(it);
    return out;
}

bool snf_image_contains(const SNFResult& s, const NovVec& v) {
    NovVec uv(s.U.rows());
    for (Eigen::Index i = 0; i < uv.size(); ++i) {
        uv(i) = Novikov();
        for (Eigen::Index j = 0; j < s.U.cols(); ++j)
            if (!s.U(i, j).is_zero() && !v(j).is_zero()) uv(i) += s.U(i, j) * v(j);
    }
    for (Eigen::Index i = 0; i < uv.size(); ++i) {
        if (uv(i).is_zero()) continue;
        if (i < static_cast<Eigen::Index>(s.rank)) {
            if (uv(i).leading_exp() < s.exponents[static_cast<size_t>(i)]) return false;
        } else {
            return false;
        }
    }
    return true;
}

} // namespace novarch
