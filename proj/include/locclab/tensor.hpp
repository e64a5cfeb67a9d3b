#ifndef LOCCLAB_TENSOR_HPP
#define LOCCLAB_TENSOR_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace locc {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kOrthogonalityTol = 1e-10;
inline constexpr double kNormalizationTol = 1e-12;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kProjectorTol = 1e-10;
// branches below this probability are pruned
inline constexpr double kProbabilityFloor = 1e-12;

enum class Sign { Plus, Minus };

class Ket {
public:
    Ket() = default;

    explicit Ket(CVector amps) : amps_(std::move(amps))
    {
        if (amps_.size() == 0)
            throw std::invalid_argument("Ket: zero dimension");
    }

    static Ket zero(std::size_t dim) { return Ket(CVector::Zero(checked(dim))); }

    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    const CVector& amps() const { return amps_; }
    Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

    double norm_squared() const { return amps_.squaredNorm(); }
    double norm() const { return amps_.norm(); }
    bool is_normalized(double tol = kNormalizationTol) const
    {
        return std::abs(norm() - 1.0) <= tol;
    }

    Ket normalized() const
    {
        double n = norm();
        if (n == 0.0)
            throw std::invalid_argument("Ket: cannot normalize zero vector");
        return Ket(amps_ / n);
    }

    friend Ket operator+(const Ket& a, const Ket& b)
    {
        same_dim(a, b);
        return Ket(a.amps_ + b.amps_);
    }
    friend Ket operator-(const Ket& a, const Ket& b)
    {
        same_dim(a, b);
        return Ket(a.amps_ - b.amps_);
    }
    friend Ket operator*(Complex s, const Ket& a) { return Ket(s * a.amps_); }

private:
    static std::size_t checked(std::size_t dim)
    {
        if (dim == 0)
            throw std::invalid_argument("Ket: zero dimension");
        return dim;
    }
    static void same_dim(const Ket& a, const Ket& b)
    {
        if (a.dim() != b.dim())
            throw std::invalid_argument("Ket: dimension mismatch");
    }

    CVector amps_;
};

class Operator {
public:
    Operator() = default;

    explicit Operator(CMatrix m) : m_(std::move(m))
    {
        if (m_.rows() != m_.cols() || m_.rows() == 0)
            throw std::invalid_argument("Operator: matrix must be square and non-empty");
    }

    static Operator identity(std::size_t dim)
    {
        auto n = static_cast<Eigen::Index>(dim);
        return Operator(CMatrix::Identity(n, n));
    }

    static Operator zero(std::size_t dim)
    {
        auto n = static_cast<Eigen::Index>(dim);
        return Operator(CMatrix::Zero(n, n));
    }

    static Operator outer(const Ket& a, const Ket& b)
    {
        return Operator(a.amps() * b.amps().adjoint());
    }

    // Orthogonal projector onto span{kets}; the kets need not be orthonormal.
    static Operator projector_onto(std::span<const Ket> kets, double rank_tol = 1e-10)
    {
        if (kets.empty())
            throw std::invalid_argument("projector_onto: no vectors");
        auto d = static_cast<Eigen::Index>(kets.front().dim());
        CMatrix cols(d, static_cast<Eigen::Index>(kets.size()));
        for (std::size_t k = 0; k < kets.size(); ++k) {
            if (kets[k].dim() != static_cast<std::size_t>(d))
                throw std::invalid_argument("projector_onto: dimension mismatch");
            cols.col(static_cast<Eigen::Index>(k)) = kets[k].amps();
        }
        Eigen::JacobiSVD<CMatrix> svd(cols, Eigen::ComputeThinU);
        const auto& s = svd.singularValues();
        Eigen::Index r = 0;
        double smax = s.size() ? s(0) : 0.0;
        while (r < s.size() && s(r) > rank_tol * std::max(1.0, smax))
            ++r;
        CMatrix u = svd.matrixU().leftCols(r);
        return Operator(u * u.adjoint());
    }

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }
    Complex operator()(std::size_t i, std::size_t j) const
    {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    Operator adjoint() const { return Operator(m_.adjoint()); }
    Complex trace() const { return m_.trace(); }

    bool is_hermitian(double tol = kHermitianTol) const
    {
        return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
    }

    bool is_projector(double tol = kProjectorTol) const
    {
        return is_hermitian(tol) && (m_ * m_ - m_).cwiseAbs().maxCoeff() <= tol;
    }

    std::size_t rank(double tol = 1e-8) const
    {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
        std::size_t r = 0;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            if (std::abs(es.eigenvalues()(i)) > tol)
                ++r;
        return r;
    }

    friend Operator operator+(const Operator& a, const Operator& b) { return Operator(a.m_ + b.m_); }
    friend Operator operator-(const Operator& a, const Operator& b) { return Operator(a.m_ - b.m_); }
    friend Operator operator*(const Operator& a, const Operator& b) { return Operator(a.m_ * b.m_); }
    friend Operator operator*(Complex s, const Operator& a) { return Operator(s * a.m_); }
    friend Ket operator*(const Operator& a, const Ket& v)
    {
        if (a.dim() != v.dim())
            throw std::invalid_argument("Operator*Ket: dimension mismatch");
        return Ket(a.m_ * v.amps());
    }

private:
    CMatrix m_;
};

inline Ket basis_ket(std::size_t dim, std::size_t i)
{
    if (i >= dim)
        throw std::out_of_range("basis_ket: index " + std::to_string(i) + " outside dimension " +
                                std::to_string(dim));
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(i)) = 1.0;
    return Ket(std::move(v));
}

// (|i> +- |i+1>)/sqrt(2)
inline Ket pm_ket(std::size_t dim, std::size_t i, Sign s)
{
    if (i + 1 >= dim)
        throw std::out_of_range("pm_ket: levels " + std::to_string(i) + "," + std::to_string(i + 1) +
                                " outside dimension " + std::to_string(dim));
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
    const double h = 1.0 / std::sqrt(2.0);
    v(static_cast<Eigen::Index>(i)) = h;
    v(static_cast<Eigen::Index>(i + 1)) = s == Sign::Plus ? h : -h;
    return Ket(std::move(v));
}

inline Complex inner(const Ket& a, const Ket& b)
{
    if (a.dim() != b.dim())
        throw std::invalid_argument("inner: dimension mismatch");
    return a.amps().dot(b.amps());  // conjugates the first argument
}

inline Ket tensor(const Ket& a, const Ket& b)
{
    const auto na = a.amps().size(), nb = b.amps().size();
    CVector out(na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        out.segment(i * nb, nb) = a.amps()(i) * b.amps();
    return Ket(std::move(out));
}

inline Ket tensor(std::span<const Ket> kets)
{
    if (kets.empty())
        throw std::invalid_argument("tensor: empty list");
    Ket out = kets.front();
    for (std::size_t k = 1; k < kets.size(); ++k)
        out = tensor(out, kets[k]);
    return out;
}

inline Operator kron(const Operator& a, const Operator& b)
{
    const auto na = a.matrix().rows(), nb = b.matrix().rows();
    CMatrix out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j)
            out.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
    return Operator(std::move(out));
}

struct Measurement {
    Ket projected;   // P|v>, unnormalized
    double probability = 0.0;
    bool survived = false;
};

inline Measurement apply_projector(const Operator& p, const Ket& v)
{
    if (p.dim() != v.dim())
        throw std::invalid_argument("apply_projector: dimension mismatch");
    if (!p.is_projector())
        throw std::invalid_argument("apply_projector: operator is not a projector");
    Ket w = p * v;
    double prob = w.norm_squared();
    return {std::move(w), prob, prob > kProbabilityFloor};
}

// Applies op to factor `which` of a vector laid out as the Kronecker
// product of `dims` (first factor slowest).
inline Ket apply_on_factor(const Operator& op, const Ket& v, std::span<const std::size_t> dims,
                           std::size_t which)
{
    if (which >= dims.size())
        throw std::out_of_range("apply_on_factor: factor index out of range");
    const std::size_t total =
        std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
    if (total != v.dim())
        throw std::invalid_argument("apply_on_factor: layout does not match vector dimension");
    const std::size_t d = dims[which];
    if (op.dim() != d)
        throw std::invalid_argument("apply_on_factor: operator dimension " + std::to_string(op.dim()) +
                                    " does not match factor dimension " + std::to_string(d));
    std::size_t inner_sz = 1;
    for (std::size_t k = which + 1; k < dims.size(); ++k)
        inner_sz *= dims[k];
    const std::size_t outer_sz = total / (d * inner_sz);

    const auto D = static_cast<Eigen::Index>(d), I = static_cast<Eigen::Index>(inner_sz);
    CVector out(v.amps().size());
    for (std::size_t o = 0; o < outer_sz; ++o) {
        const auto base = static_cast<Eigen::Index>(o * d * inner_sz);
        Eigen::Map<const CMatrix> in_blk(v.amps().data() + base, I, D);
        Eigen::Map<CMatrix> out_blk(out.data() + base, I, D);
        out_blk.noalias() = in_blk * op.matrix().transpose();
    }
    return Ket(std::move(out));
}

inline Ket apply_on_factor(const Operator& op, const Ket& v, std::initializer_list<std::size_t> dims,
                           std::size_t which)
{
    return apply_on_factor(op, v, std::span<const std::size_t>(dims.begin(), dims.size()), which);
}

}  // namespace locc

#endif  // LOCCLAB_TENSOR_HPP
