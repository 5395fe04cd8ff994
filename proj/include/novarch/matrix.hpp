#pragma once

#include <Eigen/Core>
#include <boost/multiprecision/eigen.hpp>

#include "novarch/novikov.hpp"

namespace Eigen {
template <>
struct NumTraits<novarch::Novikov> {
    using Real = novarch::Novikov;
    using NonInteger = novarch::Novikov;
    using Nested = novarch::Novikov;
    using Literal = novarch::Novikov;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 8,
        AddCost = 32,
        MulCost = 64
    };
    static inline int digits10() { return 0; }
};
} // namespace Eigen

namespace novarch {

using NovMat = Eigen::Matrix<Novikov, Eigen::Dynamic, Eigen::Dynamic>;
using NovVec = Eigen::Matrix<Novikov, Eigen::Dynamic, 1>;
using MatQ = Eigen::Matrix<Rat, Eigen::Dynamic, Eigen::Dynamic>;
using VecQ = Eigen::Matrix<Rat, Eigen::Dynamic, 1>;

inline NovMat nov_zero(Eigen::Index r, Eigen::Index c) {
    NovMat m(r, c);
    m.setConstant(Novikov());
    return m;
}
inline NovMat nov_identity(Eigen::Index n) {
    NovMat m = nov_zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = Novikov(1);
    return m;
}

// Exact products (term-by-term Novikov arithmetic).
NovMat matmul(const NovMat& a, const NovMat& b);
NovVec matvec(const NovMat& a, const NovVec& v);

// Column gathering / concatenation / per-column valuation.
NovMat pick_cols(const NovMat& m, const std::vector<int>& idx);
NovMat hcat(const NovMat& a, const NovMat& b);
ExtRat column_val(const NovMat& m, Eigen::Index j);

// All entries free of visible terms (zero modulo each entry's precision).
bool is_zero_mat(const NovMat& m);
// min entry valuation (+∞ for a matrix with no visible terms).
ExtRat matrix_val(const NovMat& m);
// min entry precision (+∞ when every entry is exact).
ExtRat matrix_precision(const NovMat& m);
NovMat truncate_mat(const NovMat& m, const ExtRat& prec);

// Basis normalization: for a map with matrix M between bases with generator
// valuations colv (source) and rowv (target), the matrix in the normalized
// bases ê_i = T^{-λ_i} e_i is  M̂(j,i) = T^{λ_j^tgt - λ_i^src} · M(j,i).
NovMat normalize_map(const NovMat& m, const std::vector<Rat>& rowv, const std::vector<Rat>& colv);
NovMat denormalize_map(const NovMat& m, const std::vector<Rat>& rowv, const std::vector<Rat>& colv);
// Coordinates of a vector in the normalized basis: v̂_i = T^{λ_i} v_i.
NovVec normalize_vec(const NovVec& v, const std::vector<Rat>& vals);
NovVec denormalize_vec(const NovVec& v, const std::vector<Rat>& vals);

} // namespace novarch
