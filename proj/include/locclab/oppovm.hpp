#ifndef LOCCLAB_OPPOVM_HPP
#define LOCCLAB_OPPOVM_HPP

#include "locclab/families.hpp"
#include "locclab/parallel.hpp"

#include <Eigen/SVD>

#include <array>
#include <future>
#include <stdexcept>
#include <string>
#include <vector>

namespace locc {

inline constexpr double kRankTol = 1e-8;
inline constexpr double kIdentityTol = 1e-8;

class OrthogonalityError : public std::runtime_error {
public:
    explicit OrthogonalityError(OrthogonalityReport rep)
        : std::runtime_error(describe(rep)), report_(std::move(rep))
    {
    }
    const OrthogonalityReport& report() const { return report_; }

private:
    static std::string describe(const OrthogonalityReport& r)
    {
        std::string msg = "state set is not orthogonal: " + std::to_string(r.violations.size()) + " pair(s) overlap";
        if (!r.violations.empty()) {
            const auto& v = r.violations.front();
            msg += ", first (" + std::to_string(v.i) + "," + std::to_string(v.j) + ") with |<i|j>|=" +
                   std::to_string(v.overlap);
        }
        return msg;
    }
    OrthogonalityReport report_;
};

// ---------------------------------------------------------------------------
// Hermitian d x d matrices as vectors in R^{d^2}.
//
// Coordinates: x_0..x_{d-1} (diagonal), then for each p<q the pair (u, v)
// with M_pq = (u + i v)/sqrt(2). The map is an isometry for the trace
// inner product, so orthonormal vectors give trace-orthonormal matrices.

inline std::size_t hermitian_param_count(std::size_t d) { return d * d; }

inline Operator hermitian_from_params(const Eigen::VectorXd& x, std::size_t d)
{
    if (static_cast<std::size_t>(x.size()) != d * d)
        throw std::invalid_argument("hermitian_from_params: expected d^2 parameters");
    const double r = 1.0 / std::sqrt(2.0);
    const auto D = static_cast<Eigen::Index>(d);
    CMatrix m = CMatrix::Zero(D, D);
    Eigen::Index k = 0;
    for (Eigen::Index p = 0; p < D; ++p)
        m(p, p) = x(k++);
    for (Eigen::Index p = 0; p < D; ++p)
        for (Eigen::Index q = p + 1; q < D; ++q) {
            Complex z(x(k) * r, x(k + 1) * r);
            m(p, q) = z;
            m(q, p) = std::conj(z);
            k += 2;
        }
    return Operator(std::move(m));
}

inline Eigen::VectorXd params_from_hermitian(const Operator& h)
{
    const auto D = static_cast<Eigen::Index>(h.dim());
    const double s = std::sqrt(2.0);
    Eigen::VectorXd x(D * D);
    Eigen::Index k = 0;
    for (Eigen::Index p = 0; p < D; ++p)
        x(k++) = h.matrix()(p, p).real();
    for (Eigen::Index p = 0; p < D; ++p)
        for (Eigen::Index q = p + 1; q < D; ++q) {
            x(k++) = h.matrix()(p, q).real() * s;
            x(k++) = h.matrix()(p, q).imag() * s;
        }
    return x;
}

// ---------------------------------------------------------------------------

struct RowSource {
    std::size_t i = 0, j = 0;
    bool imaginary = false;  // which part of <a_i|M|a_j> * overlap the row encodes
};

struct ConstraintSystem {
    Party party = Party::A;
    std::size_t dim = 0;
    Eigen::MatrixXd rows;  // n x d^2
    std::vector<RowSource> provenance;

    std::size_t row_count() const { return static_cast<std::size_t>(rows.rows()); }
};

inline ConstraintSystem build_constraints(const StateSet& set, Party party, double overlap_tol = kOrthogonalityTol)
{
    const std::size_t pi = index_of(party);
    const std::size_t d = set.dims[pi];
    const std::size_t n = set.size();
    const double r = 1.0 / std::sqrt(2.0);
    const auto D = static_cast<Eigen::Index>(d);

    // rows for pairs (i, j>i), gathered per i and concatenated in order
    std::vector<std::vector<std::pair<Eigen::VectorXd, RowSource>>> per_i(n);
    parallel_for(n, [&](std::size_t i) {
        const auto& si = set.states[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& sj = set.states[j];
            Complex ov = 1.0;
            for (std::size_t q = 0; q < 3; ++q)
                if (q != pi)
                    ov *= inner(si.factors[q], sj.factors[q]);
            if (std::abs(ov) <= overlap_tol)
                continue;
            const CVector& a = si.factors[pi].amps();
            const CVector& b = sj.factors[pi].amps();
            CMatrix c = a.conjugate() * b.transpose() * ov;  // c_pq = conj(a_p) b_q ov

            Eigen::VectorXd re(D * D), im(D * D);
            Eigen::Index k = 0;
            for (Eigen::Index p = 0; p < D; ++p, ++k) {
                re(k) = c(p, p).real();
                im(k) = c(p, p).imag();
            }
            for (Eigen::Index p = 0; p < D; ++p)
                for (Eigen::Index q = p + 1; q < D; ++q) {
                    Complex s = c(p, q) + c(q, p), t = c(p, q) - c(q, p);
                    re(k) = s.real() * r;
                    im(k) = s.imag() * r;
                    re(k + 1) = -t.imag() * r;
                    im(k + 1) = t.real() * r;
                    k += 2;
                }
            if (re.cwiseAbs().maxCoeff() > 0.0)
                per_i[i].emplace_back(std::move(re), RowSource{i, j, false});
            if (im.cwiseAbs().maxCoeff() > 0.0)
                per_i[i].emplace_back(std::move(im), RowSource{i, j, true});
        }
    });

    ConstraintSystem cs;
    cs.party = party;
    cs.dim = d;
    std::size_t total = 0;
    for (const auto& v : per_i)
        total += v.size();
    cs.rows.resize(static_cast<Eigen::Index>(total), D * D);
    cs.provenance.reserve(total);
    Eigen::Index row = 0;
    for (auto& v : per_i)
        for (auto& [vec, src] : v) {
            cs.rows.row(row++) = vec.transpose();
            cs.provenance.push_back(src);
        }
    return cs;
}

struct SolutionSpace {
    std::size_t dim = 0;
    std::vector<Operator> basis;
    bool trivial = false;
    // distance of I/sqrt(d) from the solution span (0 when I is a solution)
    double identity_residual = 0.0;
    std::vector<double> singular_values;
    std::size_t rank = 0;
};

inline SolutionSpace hermitian_nullspace(const ConstraintSystem& cs, double rel_tol = kRankTol)
{
    const std::size_t d = cs.dim;
    if (d == 0)
        throw std::invalid_argument("hermitian_nullspace: zero dimension");
    const auto N = static_cast<Eigen::Index>(d * d);

    SolutionSpace sol;
    Eigen::MatrixXd null_vecs;
    if (cs.rows.rows() == 0) {
        null_vecs = Eigen::MatrixXd::Identity(N, N);
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(cs.rows, Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        const double smax = s.size() ? s(0) : 0.0;
        std::size_t rank = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            sol.singular_values.push_back(s(i));
            if (s(i) > rel_tol * smax)
                ++rank;
        }
        sol.rank = rank;
        null_vecs = svd.matrixV().rightCols(N - static_cast<Eigen::Index>(rank));
    }
    sol.dim = static_cast<std::size_t>(null_vecs.cols());
    for (Eigen::Index c = 0; c < null_vecs.cols(); ++c)
        sol.basis.push_back(hermitian_from_params(null_vecs.col(c), d));

    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    e.head(static_cast<Eigen::Index>(d)).setConstant(1.0 / std::sqrt(static_cast<double>(d)));
    Eigen::VectorXd proj = null_vecs * (null_vecs.transpose() * e);
    sol.identity_residual = (e - proj).norm();
    sol.trivial = cs.rows.rows() > 0 && sol.dim == 1 && sol.identity_residual <= kIdentityTol;
    return sol;
}

struct PartyVerdict {
    Party party = Party::A;
    std::size_t dim = 0;
    bool trivial = false;
    double identity_residual = 0.0;
    std::size_t constraint_rows = 0;
};

struct NonlocalityVerdict {
    Family family = Family::Custom;
    FamilyParams params;
    std::array<std::size_t, 3> dims{};
    std::size_t state_count = 0;
    std::array<PartyVerdict, 3> per_party{};
    bool locally_trivial = false;

    std::string verdict() const { return locally_trivial ? "locally-trivial" : "nontrivial"; }
};

inline NonlocalityVerdict verify_nonlocality(const StateSet& set, double orth_tol = kOrthogonalityTol,
                                             double rank_tol = kRankTol)
{
    auto orth = check_orthogonality(set, orth_tol);
    if (!orth.ok())
        throw OrthogonalityError(std::move(orth));

    NonlocalityVerdict v;
    v.family = set.family;
    v.params = set.params;
    v.dims = set.dims;
    v.state_count = set.size();

    auto one = [&](Party p) {
        ConstraintSystem cs = build_constraints(set, p, orth_tol);
        SolutionSpace sol = hermitian_nullspace(cs, rank_tol);
        return PartyVerdict{p, sol.dim, sol.trivial, sol.identity_residual, cs.row_count()};
    };
    std::array<std::future<PartyVerdict>, 3> jobs;
    const auto policy = thread_budget() > 1 ? std::launch::async : std::launch::deferred;
    for (Party p : kParties)
        jobs[index_of(p)] = std::async(policy, one, p);
    for (Party p : kParties)
        v.per_party[index_of(p)] = jobs[index_of(p)].get();

    v.locally_trivial = v.per_party[0].trivial && v.per_party[1].trivial && v.per_party[2].trivial;
    return v;
}

}  // namespace locc

#endif  // LOCCLAB_OPPOVM_HPP
