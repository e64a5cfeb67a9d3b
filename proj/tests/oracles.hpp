// Reference computations used by the tests. They work on raw Eigen data with
// explicit index loops and do not call the library's tensor, constraint or
// simulation code, so agreement is a real cross-check.

#ifndef LOCCLAB_TESTS_ORACLES_HPP
#define LOCCLAB_TESTS_ORACLES_HPP

#include "locclab.hpp"

#include <Eigen/LU>

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using locc::CMatrix;
using locc::Complex;
using locc::CVector;

inline CVector kron_vec(const CVector& a, const CVector& b)
{
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j)
            out(i * b.size() + j) = a(i) * b(j);
    return out;
}

inline CMatrix kron_mat(const CMatrix& a, const CMatrix& b)
{
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index k = 0; k < b.rows(); ++k)
                for (Eigen::Index l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

inline Complex dot(const CVector& a, const CVector& b)
{
    Complex s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        s += std::conj(a(i)) * b(i);
    return s;
}

// full joint vector of a product state
inline CVector joint(const locc::ProductState& s)
{
    return kron_vec(kron_vec(s.factors[0].amps(), s.factors[1].amps()), s.factors[2].amps());
}

// largest |<s_i|s_j>| over i < j, from full joint vectors
inline double max_joint_overlap(const locc::StateSet& set)
{
    std::vector<CVector> v;
    for (const auto& s : set.states)
        v.push_back(joint(s));
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            worst = std::max(worst, std::abs(dot(v[i], v[j])));
    return worst;
}

// ---------------------------------------------------------------------------
// Hermitian solutions of <a_i|M|a_j> * (other overlaps) = 0, in the real
// basis {E_pp, E_pq + E_qp, i(E_pq - E_qp)}; rank via full-pivot LU.

struct NullResult {
    std::size_t dim = 0;
    bool identity_solves = false;
};

inline std::vector<CMatrix> hermitian_basis(std::size_t d)
{
    const auto D = static_cast<Eigen::Index>(d);
    std::vector<CMatrix> out;
    for (Eigen::Index p = 0; p < D; ++p) {
        CMatrix m = CMatrix::Zero(D, D);
        m(p, p) = 1.0;
        out.push_back(m);
    }
    for (Eigen::Index p = 0; p < D; ++p)
        for (Eigen::Index q = p + 1; q < D; ++q) {
            CMatrix s = CMatrix::Zero(D, D), a = CMatrix::Zero(D, D);
            s(p, q) = s(q, p) = 1.0;
            a(p, q) = Complex(0, 1);
            a(q, p) = Complex(0, -1);
            out.push_back(s);
            out.push_back(a);
        }
    return out;
}

inline NullResult hermitian_solutions(const locc::StateSet& set, std::size_t party, double tol = 1e-10)
{
    const std::size_t d = set.dims[party];
    const auto basis = hermitian_basis(d);
    const auto K = static_cast<Eigen::Index>(basis.size());
    std::vector<Eigen::VectorXd> rows;
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            Complex ov = 1.0;
            for (std::size_t q = 0; q < 3; ++q)
                if (q != party)
                    ov *= dot(set.states[i].factors[q].amps(), set.states[j].factors[q].amps());
            if (std::abs(ov) <= tol)
                continue;
            const CVector& a = set.states[i].factors[party].amps();
            const CVector& b = set.states[j].factors[party].amps();
            Eigen::VectorXd re(K), im(K);
            for (Eigen::Index k = 0; k < K; ++k) {
                Complex f = dot(a, basis[static_cast<std::size_t>(k)] * b) * ov;
                re(k) = f.real();
                im(k) = f.imag();
            }
            rows.push_back(re);
            rows.push_back(im);
        }
    NullResult r;
    if (rows.empty()) {
        r.dim = static_cast<std::size_t>(K);
        r.identity_solves = true;
        return r;
    }
    Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), K);
    for (std::size_t i = 0; i < rows.size(); ++i)
        A.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    const double scale = A.cwiseAbs().maxCoeff();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-9);
    r.dim = static_cast<std::size_t>(K - lu.rank());
    Eigen::VectorXd id = Eigen::VectorXd::Zero(K);
    id.head(static_cast<Eigen::Index>(d)).setOnes();
    r.identity_solves = (A * id).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, scale);
    return r;
}

// ---------------------------------------------------------------------------
// Protocol walk on the full register (A sys, A anc, B sys, B anc, C sys, C anc)
// with a hand-written index loop for every local projector.

struct Register {
    std::array<std::size_t, 3> sys{}, anc{};
    std::size_t factor(std::size_t p) const { return sys[p] * anc[p]; }
    std::size_t total() const { return factor(0) * factor(1) * factor(2); }
};

inline Register register_for(const locc::StateSet& set, const locc::ResourceState& r)
{
    Register g;
    g.sys = set.dims;
    for (std::size_t p = 0; p < 3; ++p)
        g.anc[p] = std::size_t{1} << r.qubits()[p];
    return g;
}

// The resource ket lists A's qubits, then B's, then C's.
inline CVector input(const locc::ProductState& s, const locc::ResourceState& res, const Register& g)
{
    CVector v = CVector::Zero(static_cast<Eigen::Index>(g.total()));
    const CVector& R = res.ket().amps();
    for (std::size_t a = 0; a < g.sys[0]; ++a)
        for (std::size_t al = 0; al < g.anc[0]; ++al)
            for (std::size_t b = 0; b < g.sys[1]; ++b)
                for (std::size_t be = 0; be < g.anc[1]; ++be)
                    for (std::size_t c = 0; c < g.sys[2]; ++c)
                        for (std::size_t ga = 0; ga < g.anc[2]; ++ga) {
                            std::size_t idx = ((a * g.anc[0] + al) * g.factor(1) + b * g.anc[1] + be) * g.factor(2) +
                                              c * g.anc[2] + ga;
                            std::size_t r = (al * g.anc[1] + be) * g.anc[2] + ga;
                            v(static_cast<Eigen::Index>(idx)) = s.factors[0][a] * s.factors[1][b] *
                                                                s.factors[2][c] * R(static_cast<Eigen::Index>(r));
                        }
    return v;
}

inline CVector apply_local(const CMatrix& op, const CVector& v, const Register& g, std::size_t p)
{
    const std::size_t f0 = g.factor(0), f1 = g.factor(1), f2 = g.factor(2);
    CVector out = CVector::Zero(v.size());
    for (std::size_t x = 0; x < f0; ++x)
        for (std::size_t y = 0; y < f1; ++y)
            for (std::size_t z = 0; z < f2; ++z) {
                std::size_t row[3] = {x, y, z};
                Complex acc = 0.0;
                const std::size_t dp = g.factor(p);
                for (std::size_t k = 0; k < dp; ++k) {
                    std::size_t col[3] = {x, y, z};
                    col[p] = k;
                    acc += op(static_cast<Eigen::Index>(row[p]), static_cast<Eigen::Index>(k)) *
                           v(static_cast<Eigen::Index>((col[0] * f1 + col[1]) * f2 + col[2]));
                }
                out(static_cast<Eigen::Index>((x * f1 + y) * f2 + z)) = acc;
            }
    return out;
}

struct WalkResult {
    double success = 0.0;
    double total = 0.0;
    std::size_t leaves_reached = 0;
};

inline WalkResult walk(const locc::ProductState& s, const locc::ResourceState& res, const locc::MeasurementNode& root,
                       const locc::StateSet& set)
{
    const Register g = register_for(set, res);
    const std::string key = s.key();
    WalkResult out;
    std::function<void(const locc::MeasurementNode&, const CVector&)> rec = [&](const locc::MeasurementNode& n,
                                                                               const CVector& v) {
        const std::size_t p = locc::index_of(n.party);
        for (const auto& o : n.outcomes) {
            CVector w = apply_local(o.projector.matrix(), v, g, p);
            double prob = w.squaredNorm();
            if (prob <= 1e-14)
                continue;
            if (o.next) {
                rec(*o.next, w);
                continue;
            }
            out.total += prob;
            ++out.leaves_reached;
            if (o.guess && *o.guess == key)
                out.success += prob;
        }
    };
    rec(root, input(s, res, g));
    return out;
}

}  // namespace oracle

#endif  // LOCCLAB_TESTS_ORACLES_HPP
