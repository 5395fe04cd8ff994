#include "novarch/complexes.hpp"

#include "novarch/errors.hpp"
#include "novarch/snf.hpp"

#include <algorithm>

namespace novarch {

namespace {

int parity(int k) { return ((k % 2) + 2) % 2; }

bool flag_at(const std::vector<std::uint8_t>& flags, int i) {
    return i < static_cast<int>(flags.size()) && flags[i] != 0;
}

}  // namespace

NovMat FloerTypeComplex::d_theta() const {
    return normalize_map(d, relative_valuation, relative_valuation);
}

NovMat FloerTypeComplex::d_norm() const {
    return normalize_map(d, basis.valuations(), basis.valuations());
}

MatQ FloerTypeComplex::split_d0() const {
    const NovMat th = d_theta();
    MatQ d0 = MatQ::Zero(th.rows(), th.cols());
    for (Eigen::Index j = 0; j < th.rows(); ++j)
        for (Eigen::Index i = 0; i < th.cols(); ++i) d0(j, i) = th(j, i).coeff_at(0);
    return d0;
}

NovMat FloerTypeComplex::split_d1() const {
    const NovMat th = d_theta();
    NovMat d1 = nov_zero(th.rows(), th.cols());
    for (Eigen::Index j = 0; j < th.rows(); ++j)
        for (Eigen::Index i = 0; i < th.cols(); ++i) {
            Novikov tail = th(j, i) - Novikov(th(j, i).coeff_at(0));
            d1(j, i) = tail.shifted(-hbar);
        }
    return d1;
}

std::vector<Rat> FloerTypeComplex::residual_valuations() const {
    std::vector<Rat> w(basis.gens.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = basis.gens[i].valuation - relative_valuation[i];
    return w;
}

NovMat ReducedComplex::d0_nov() const {
    NovMat m = nov_zero(d0.rows(), d0.cols());
    for (Eigen::Index j = 0; j < d0.rows(); ++j)
        for (Eigen::Index i = 0; i < d0.cols(); ++i)
            if (d0(j, i) != 0) m(j, i) = Novikov(d0(j, i));
    return m;
}

NovMat ReducedComplex::d0_norm() const {
    return normalize_map(d0_nov(), basis.valuations(), basis.valuations());
}

void ValidationReport::fail(std::string condition, std::string witness) {
    valid = false;
    issues.push_back({std::move(condition), std::move(witness)});
}

ValidationReport validate_floer_type(const FloerTypeComplex& c) {
    ValidationReport rep;
    const int n = c.size();

    try {
        c.basis.validate();
    } catch (const Error& e) {
        rep.fail("basis", e.what());
    }
    if (static_cast<int>(c.relative_valuation.size()) != n)
        rep.fail("shape", "relative_valuation has wrong length");
    if (!c.outside.empty() && static_cast<int>(c.outside.size()) != n)
        rep.fail("shape", "outside flags have wrong length");
    if (c.d.rows() != n || c.d.cols() != n) rep.fail("shape", "differential is not n x n");
    if (!(c.hbar > 0)) rep.fail("hbar-positive", "hbar = " + rat_str(c.hbar));
    if (!rep.valid) return rep;

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (c.d(j, i).is_zero()) continue;
            const int from = c.basis.gens[i].degree, to = c.basis.gens[j].degree;
            const bool ok = c.basis.z2_graded ? parity(to) == parity(from + 1) : to == from + 1;
            if (!ok)
                rep.fail("grading", "d(" + c.basis.gens[i].name + ") hits " +
                                        c.basis.gens[j].name + " of degree " + std::to_string(to));
        }

    const NovMat dn = c.d_norm();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (dn(j, i).is_zero()) continue;
            if (dn(j, i).val().value_or(0) < 0)
                rep.fail("norm-increase", "d(" + c.basis.gens[i].name + ") component at " +
                                              c.basis.gens[j].name + " has valuation " +
                                              dn(j, i).val().str() + " after normalization");
        }

    const NovMat th = c.d_theta();
    std::optional<Rat> gap;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (const auto& t : th(j, i).terms()) {
                if (t.exp > 0 && (!gap || t.exp < *gap)) gap = t.exp;
                if (t.exp < 0 || (t.exp > 0 && t.exp < c.hbar))
                    rep.fail("scale-gap", "relative exponent " + rat_str(t.exp) + " of d(" +
                                              c.basis.gens[i].name + ") at " +
                                              c.basis.gens[j].name + " lies outside {0} u [" +
                                              rat_str(c.hbar) + ", inf)");
            }
    rep.observed_gap = gap;

    NovMat dd = matmul(c.d, c.d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!dd(j, i).is_zero())
                rep.fail("d-squared", "d^2(" + c.basis.gens[i].name + ") at " +
                                          c.basis.gens[j].name + " = " + dd(j, i).str());
    return rep;
}

void require_valid(const FloerTypeComplex& c) {
    const ValidationReport rep = validate_floer_type(c);
    if (rep.valid) return;
    const ValidationIssue& is = rep.issues.front();
    if (is.condition == "basis" || is.condition == "shape") throw SchemaError(is.witness);
    if (is.condition == "grading") throw GradingMismatch(is.witness);
    if (is.condition == "d-squared") throw NotAComplex(is.witness);
    throw InvariantError(is.condition + ": " + is.witness);
}

int DegreeBlocks::dim(int k) const {
    auto it = dims.find(z2 ? parity(k) : k);
    return it == dims.end() ? 0 : it->second;
}

const NovMat* DegreeBlocks::block(int k) const {
    auto it = dmat.find(z2 ? parity(k) : k);
    return it == dmat.end() ? nullptr : &it->second;
}

DegreeBlocks degree_blocks(const ValuedBasis& basis, const NovMat& normalized_d) {
    DegreeBlocks b;
    b.z2 = basis.z2_graded;
    const int n = static_cast<int>(basis.gens.size());
    for (int i = 0; i < n; ++i) {
        const int k = b.z2 ? parity(basis.gens[i].degree) : basis.gens[i].degree;
        b.idx[k].push_back(i);
    }
    for (const auto& [k, v] : b.idx) b.dims[k] = static_cast<int>(v.size());

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (normalized_d(j, i).is_zero()) continue;
            const int from = basis.gens[i].degree, to = basis.gens[j].degree;
            const bool ok = b.z2 ? parity(to) == parity(from + 1) : to == from + 1;
            if (!ok)
                throw GradingMismatch("entry " + basis.gens[i].name + " -> " +
                                      basis.gens[j].name + " violates degree +1");
        }

    for (const auto& [k, src] : b.idx) {
        const int kt = b.z2 ? parity(k + 1) : k + 1;
        auto tgt_it = b.idx.find(kt);
        const std::vector<int> empty;
        const std::vector<int>& tgt = tgt_it == b.idx.end() ? empty : tgt_it->second;
        NovMat blk = nov_zero(static_cast<int>(tgt.size()), static_cast<int>(src.size()));
        for (std::size_t ic = 0; ic < src.size(); ++ic)
            for (std::size_t jr = 0; jr < tgt.size(); ++jr)
                blk(jr, ic) = normalized_d(tgt[jr], src[ic]);
        b.dmat[k] = std::move(blk);
    }
    return b;
}

TorsionBarcode homology_barcode(const FloerTypeComplex& c, int slack) {
    const DegreeBlocks b = degree_blocks(c.basis, c.d_norm());
    return homology_barcode_raw(b.dmat, b.dims, c.basis.z2_graded, slack);
}

TorsionBarcode homology_barcode(const ReducedComplex& c, int slack) {
    const DegreeBlocks b = degree_blocks(c.basis, c.d0_norm());
    return homology_barcode_raw(b.dmat, b.dims, c.basis.z2_graded, slack);
}

Telescope build_telescope(const std::vector<TelescopeStage>& stages) {
    if (stages.empty()) throw SchemaError("telescope needs at least one stage");
    const int m = static_cast<int>(stages.size());
    for (const auto& s : stages) require_valid(s.complex);
    const bool z2 = stages.front().complex.basis.z2_graded;
    for (const auto& s : stages)
        if (s.complex.basis.z2_graded != z2)
            throw SchemaError("telescope stages mix Z and Z/2 gradings");

    Rat hbar_tel = stages.front().complex.hbar;
    ExtRat prec = stages.front().complex.precision;
    for (const auto& s : stages) {
        hbar_tel = std::min(hbar_tel, s.complex.hbar);
        prec = ext_min(prec, s.complex.precision);
    }

    for (int nstage = 0; nstage + 1 < m; ++nstage) {
        const FloerTypeComplex& cur = stages[nstage].complex;
        const FloerTypeComplex& nxt = stages[nstage + 1].complex;
        const NovMat& k = stages[nstage].kappa;
        if (k.rows() != nxt.size() || k.cols() != cur.size())
            throw SchemaError("telescope comparison map has wrong shape at stage " +
                              std::to_string(nstage));
        for (int i = 0; i < cur.size(); ++i)
            for (int j = 0; j < nxt.size(); ++j) {
                if (k(j, i).is_zero()) continue;
                const int from = cur.basis.gens[i].degree, to = nxt.basis.gens[j].degree;
                if (z2 ? parity(to) != parity(from) : to != from)
                    throw GradingMismatch("comparison map at stage " + std::to_string(nstage) +
                                          " is not degree 0");
            }
        const NovMat kn = normalize_map(k, nxt.basis.valuations(), cur.basis.valuations());
        for (int i = 0; i < cur.size(); ++i)
            for (int j = 0; j < nxt.size(); ++j)
                if (!kn(j, i).is_zero() && kn(j, i).val().value_or(0) < 0)
                    throw InvariantError("comparison map at stage " + std::to_string(nstage) +
                                         " increases the action norm");
        const NovMat kth = normalize_map(k, nxt.relative_valuation, cur.relative_valuation);
        for (int i = 0; i < cur.size(); ++i)
            for (int j = 0; j < nxt.size(); ++j)
                for (const auto& t : kth(j, i).terms()) {
                    if (t.exp < 0)
                        throw InvariantError("comparison map at stage " + std::to_string(nstage) +
                                             " violates the relative filtration");
                    if (t.exp > 0) hbar_tel = std::min(hbar_tel, t.exp);
                }
        NovMat comm = matmul(nxt.d, k) - matmul(k, cur.d);
        for (int i = 0; i < cur.size(); ++i)
            for (int j = 0; j < nxt.size(); ++j)
                if (!comm(j, i).is_zero())
                    throw NotChainMap("comparison map at stage " + std::to_string(nstage) +
                                      " fails d k = k d at " + cur.basis.gens[i].name + " -> " +
                                      nxt.basis.gens[j].name);
    }

    // Layout: all plain copies stage by stage, then the shifted cone copies.
    std::vector<int> plain_off(m), cone_off(m, -1);
    int total = 0;
    for (int nstage = 0; nstage < m; ++nstage) {
        plain_off[nstage] = total;
        total += stages[nstage].complex.size();
    }
    for (int nstage = 0; nstage + 1 < m; ++nstage) {
        cone_off[nstage] = total;
        total += stages[nstage].complex.size();
    }

    Telescope tel;
    tel.complex.basis.z2_graded = z2;
    tel.complex.hbar = hbar_tel;
    tel.complex.precision = prec;
    tel.complex.d = nov_zero(total, total);
    tel.complex.relative_valuation.resize(total);
    tel.complex.outside.assign(total, 0);
    tel.origin.resize(total);

    for (int nstage = 0; nstage < m; ++nstage) {
        const FloerTypeComplex& s = stages[nstage].complex;
        for (int i = 0; i < s.size(); ++i) {
            const Generator& g = s.basis.gens[i];
            const int at = plain_off[nstage] + i;
            tel.complex.basis.gens.push_back(
                {g.name + "@" + std::to_string(nstage), g.degree, g.valuation});
            tel.complex.relative_valuation[at] = s.relative_valuation[i];
            tel.complex.outside[at] = flag_at(s.outside, i) ? 1 : 0;
            tel.origin[at] = {nstage, i, false};
        }
    }
    for (int nstage = 0; nstage + 1 < m; ++nstage) {
        const FloerTypeComplex& s = stages[nstage].complex;
        for (int i = 0; i < s.size(); ++i) {
            const Generator& g = s.basis.gens[i];
            const int at = cone_off[nstage] + i;
            tel.complex.basis.gens.push_back(
                {"q." + g.name + "@" + std::to_string(nstage), g.degree - 1, g.valuation});
            tel.complex.relative_valuation[at] = s.relative_valuation[i];
            tel.complex.outside[at] = flag_at(s.outside, i) ? 1 : 0;
            tel.origin[at] = {nstage, i, true};
        }
    }

    for (int nstage = 0; nstage < m; ++nstage) {
        const FloerTypeComplex& s = stages[nstage].complex;
        for (int i = 0; i < s.size(); ++i)
            for (int j = 0; j < s.size(); ++j)
                tel.complex.d(plain_off[nstage] + j, plain_off[nstage] + i) = s.d(j, i);
    }
    for (int nstage = 0; nstage + 1 < m; ++nstage) {
        const FloerTypeComplex& s = stages[nstage].complex;
        const NovMat& k = stages[nstage].kappa;
        for (int i = 0; i < s.size(); ++i) {
            const int col = cone_off[nstage] + i;
            const Rat sign = parity(s.basis.gens[i].degree) == 0 ? Rat(1) : Rat(-1);
            for (int j = 0; j < s.size(); ++j)
                tel.complex.d(cone_off[nstage] + j, col) = s.d(j, i);
            tel.complex.d(plain_off[nstage] + i, col) -= Novikov(sign);
            for (int j = 0; j < stages[nstage + 1].complex.size(); ++j)
                tel.complex.d(plain_off[nstage + 1] + j, col) += k(j, i).scaled(sign);
        }
    }

    require_valid(tel.complex);
    return tel;
}

ReducedComplex associated_graded(const FloerTypeComplex& c) {
    require_valid(c);
    ReducedComplex rc;
    rc.basis.z2_graded = c.basis.z2_graded;
    const std::vector<Rat> w = c.residual_valuations();
    for (int i = 0; i < c.size(); ++i)
        rc.basis.gens.push_back({c.basis.gens[i].name, c.basis.gens[i].degree, w[i]});
    rc.d0 = c.split_d0();
    rc.hbar = c.hbar;
    rc.outside = c.outside;
    rc.precision = c.precision;
    return rc;
}

ReducedComplex quotient_outside(const ReducedComplex& c) {
    const int n = c.size();
    std::vector<int> in, out;
    for (int i = 0; i < n; ++i) (flag_at(c.outside, i) ? out : in).push_back(i);

    for (int i : out)
        for (int j : in)
            if (c.d0(j, i) != 0)
                throw NotSubcomplex("d(" + c.basis.gens[i].name + ") leaves the flagged block at " +
                                    c.basis.gens[j].name);

    if (!out.empty()) {
        ReducedComplex sub;
        sub.basis.z2_graded = c.basis.z2_graded;
        for (int i : out) sub.basis.gens.push_back(c.basis.gens[i]);
        sub.d0 = MatQ::Zero(out.size(), out.size());
        for (std::size_t a = 0; a < out.size(); ++a)
            for (std::size_t b = 0; b < out.size(); ++b) sub.d0(b, a) = c.d0(out[b], out[a]);
        sub.hbar = c.hbar;
        sub.precision = c.precision;
        const TorsionBarcode bc = homology_barcode(sub);
        for (const auto& [k, r] : bc.free_rank)
            if (r != 0)
                throw NotAcyclic("flagged block has free homology of rank " + std::to_string(r) +
                                 " in degree " + std::to_string(k));
        for (const auto& [k, bars] : bc.torsion)
            if (!bars.empty())
                throw NotAcyclic("flagged block has torsion " + rat_str(bars.front()) +
                                 " in degree " + std::to_string(k));
    }

    ReducedComplex q;
    q.basis.z2_graded = c.basis.z2_graded;
    for (int i : in) q.basis.gens.push_back(c.basis.gens[i]);
    q.d0 = MatQ::Zero(in.size(), in.size());
    for (std::size_t a = 0; a < in.size(); ++a)
        for (std::size_t b = 0; b < in.size(); ++b) q.d0(b, a) = c.d0(in[b], in[a]);
    q.hbar = c.hbar;
    q.outside.assign(in.size(), 0);
    q.precision = c.precision;

    if (!(homology_barcode(c) == homology_barcode(q)))
        throw InvariantError("quotient by the flagged block changed the barcode");
    return q;
}

}  // namespace novarch
