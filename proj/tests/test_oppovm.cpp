#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace locc;

TEST(HermitianParams, RoundTripAndTraceInnerProduct)
{
    const std::size_t d = 4;
    Eigen::VectorXd x = Eigen::VectorXd::Random(16);
    Operator h = hermitian_from_params(x, d);
    EXPECT_TRUE(h.is_hermitian());
    EXPECT_LT((params_from_hermitian(h) - x).norm(), 1e-14);
    // orthonormal parameterization: Tr(H1 H2) = x1 . x2
    Eigen::VectorXd y = Eigen::VectorXd::Random(16);
    Complex tr = (h.matrix() * hermitian_from_params(y, d).matrix()).trace();
    EXPECT_NEAR(tr.real(), x.dot(y), 1e-12);
    EXPECT_THROW(hermitian_from_params(Eigen::VectorXd::Zero(15), d), std::invalid_argument);
}

TEST(Constraints, SolutionsSatisfyEveryPairCondition)
{
    // subset of the 2x2x2 basis leaves room for nontrivial solutions
    StateSet s = gen_product_basis(2, 2, 2);
    s.states.resize(5);
    for (Party p : kParties) {
        ConstraintSystem cs = build_constraints(s, p);
        SolutionSpace sol = hermitian_nullspace(cs);
        for (const auto& M : sol.basis)
            for (std::size_t i = 0; i < s.size(); ++i)
                for (std::size_t j = i + 1; j < s.size(); ++j) {
                    Complex ov = 1.0;
                    for (Party q : kParties)
                        if (q != p)
                            ov *= inner(s.states[i].factor(q), s.states[j].factor(q));
                    Complex v = inner(s.states[i].factor(p), M * s.states[j].factor(p)) * ov;
                    EXPECT_LT(std::abs(v), 1e-10);
                }
    }
}

TEST(Verifier, ExampleOneIsLocallyTrivial)
{
    StateSet s = gen_example1();
    NonlocalityVerdict v = verify_nonlocality(s);
    EXPECT_TRUE(v.locally_trivial);
    EXPECT_EQ(v.verdict(), "locally-trivial");
    for (const auto& p : v.per_party) {
        EXPECT_EQ(p.dim, 1u);
        EXPECT_LE(p.identity_residual, 1e-8);
        auto o = oracle::hermitian_solutions(s, index_of(p.party));
        EXPECT_EQ(o.dim, 1u);
        EXPECT_TRUE(o.identity_solves);
    }
}

// The single solution is a multiple of the identity: all off-diagonal entries
// vanish and the diagonal is flat.
TEST(Verifier, ExampleOneSolutionIsScalar)
{
    StateSet s = gen_example1();
    for (Party p : kParties) {
        SolutionSpace sol = hermitian_nullspace(build_constraints(s, p));
        ASSERT_EQ(sol.basis.size(), 1u);
        const CMatrix& m = sol.basis[0].matrix();
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = 0; j < 6; ++j)
                if (i != j)
                    EXPECT_LT(std::abs(m(i, j)), 1e-10);
        for (Eigen::Index i = 1; i < 6; ++i)
            EXPECT_NEAR(m(i, i).real(), m(0, 0).real(), 1e-10);
    }
}

TEST(Verifier, ProductBasisHasDiagonalSolutions)
{
    for (std::size_t d : {2u, 3u}) {
        StateSet s = gen_product_basis(d, d, d);
        NonlocalityVerdict v = verify_nonlocality(s);
        EXPECT_FALSE(v.locally_trivial);
        EXPECT_EQ(v.verdict(), "nontrivial");
        for (const auto& p : v.per_party) {
            EXPECT_EQ(p.dim, d);
            EXPECT_EQ(oracle::hermitian_solutions(s, index_of(p.party)).dim, d);
        }
        // every solution is diagonal
        for (const auto& M : hermitian_nullspace(build_constraints(s, Party::B)).basis) {
            CMatrix off = M.matrix();
            off.diagonal().setZero();
            EXPECT_LT(off.norm(), 1e-10);
        }
    }
}

TEST(Verifier, EmptyConstraintSystemIsUnconstrained)
{
    StateSet s = gen_product_basis(2, 2, 2);
    s.states.resize(1);
    ConstraintSystem cs = build_constraints(s, Party::A);
    EXPECT_EQ(cs.row_count(), 0u);
    SolutionSpace sol = hermitian_nullspace(cs);
    EXPECT_EQ(sol.dim, 4u);
    EXPECT_FALSE(sol.trivial);
}

TEST(Verifier, VerdictStableAcrossRankThresholds)
{
    StateSet s = gen_theorem3(2, 2, 2);
    for (double tol : {1e-6, 1e-7, 1e-8, 1e-9, 1e-10}) {
        NonlocalityVerdict v = verify_nonlocality(s, kOrthogonalityTol, tol);
        EXPECT_TRUE(v.locally_trivial) << "rank tolerance " << tol;
    }
}

// Dropping the -- partner of each +- pair breaks the argument: the remaining
// set admits nontrivial solutions for at least one party.
TEST(Verifier, RemovingMinusPartnersBreaksTriviality)
{
    StateSet s = gen_example1();
    std::vector<ProductState> kept;
    for (const auto& st : s.states)
        if (st.key().find('-') == std::string::npos)
            kept.push_back(st);
    s.states = kept;
    s.family = Family::Custom;
    NonlocalityVerdict v = verify_nonlocality(s);
    EXPECT_FALSE(v.locally_trivial);
}

TEST(Verifier, SubsetsNeverShrinkTheSolutionSpace)
{
    StateSet full = gen_example2();
    std::array<std::size_t, 3> prev{};
    for (Party p : kParties)
        prev[index_of(p)] = hermitian_nullspace(build_constraints(full, p)).dim;
    StateSet s = full;
    while (s.size() > 2) {
        s.states.pop_back();
        for (Party p : kParties) {
            std::size_t d = hermitian_nullspace(build_constraints(s, p)).dim;
            EXPECT_GE(d, prev[index_of(p)]);
            prev[index_of(p)] = d;
        }
    }
}

TEST(Verifier, CyclicFamiliesHaveEqualPartyDims)
{
    for (const StateSet& s : {gen_theorem1(5), gen_theorem2(4)}) {
        NonlocalityVerdict v = verify_nonlocality(s);
        EXPECT_EQ(v.per_party[0].dim, v.per_party[1].dim);
        EXPECT_EQ(v.per_party[1].dim, v.per_party[2].dim);
        EXPECT_TRUE(v.locally_trivial) << family_name(s.family);
    }
}

TEST(Verifier, RemainingFamiliesAreLocallyTrivial)
{
    for (const StateSet& s :
         {gen_theorem3(2, 2, 2), gen_theorem4(2, 2, 2), gen_theorem5(2, 2, 2), gen_theorem6(3, 3, 3)}) {
        NonlocalityVerdict v = verify_nonlocality(s);
        EXPECT_TRUE(v.locally_trivial) << family_name(s.family);
        for (const auto& p : v.per_party)
            EXPECT_EQ(oracle::hermitian_solutions(s, index_of(p.party)).dim, 1u)
                << family_name(s.family) << " party " << party_char(p.party);
    }
}

TEST(Verifier, NonOrthogonalInputIsRejected)
{
    StateSet s = gen_example2();
    s.states[0].factors[0] = pm_ket(5, 1, Sign::Plus);
    s.states[1].factors[0] = pm_ket(5, 1, Sign::Plus);
    try {
        verify_nonlocality(s);
        FAIL() << "expected OrthogonalityError";
    } catch (const OrthogonalityError& e) {
        EXPECT_FALSE(e.report().ok());
        EXPECT_NEAR(e.report().max_overlap, 1.0, 1e-12);
    }
}

TEST(Verifier, ConstraintRowsAreDeterministic)
{
    StateSet s = gen_theorem4(2, 2, 2);
    ConstraintSystem a = build_constraints(s, Party::C), b = build_constraints(s, Party::C);
    ASSERT_EQ(a.row_count(), b.row_count());
    EXPECT_EQ((a.rows - b.rows).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(a.provenance.size(), a.row_count());
}
