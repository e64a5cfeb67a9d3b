#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace locc;

namespace {

// Z measurements by A, then B, then C on a computational basis.
NodePtr z_tree(const StateSet& s, bool mislabel = false)
{
    using namespace build;
    const Space SA{s.dims[0], 0}, SB{s.dims[1], 0}, SC{s.dims[2], 0};
    Node a(Party::A);
    for (std::size_t i = 0; i < s.dims[0]; ++i) {
        Node b(Party::B);
        for (std::size_t j = 0; j < s.dims[1]; ++j) {
            Node c(Party::C);
            for (std::size_t k = 0; k < s.dims[2]; ++k) {
                std::string key = key3(std::to_string(i), std::to_string(j), std::to_string(k));
                if (mislabel && i == 0 && j == 0)
                    key = key3("1", "1", std::to_string(k));
                c.on("c" + std::to_string(k), lv(SC, k), leaf(key));
            }
            b.on("b" + std::to_string(j), lv(SB, j), c.done());
        }
        a.on("a" + std::to_string(i), lv(SA, i), b.done());
    }
    return a.done();
}

// labels of states that reach the node below `path` with nonzero probability
std::set<std::string> reaching(const BuiltinProtocol& bp, const ResourceState& res, const std::vector<std::string>& path)
{
    const oracle::Register g = oracle::register_for(bp.set, res);
    std::set<std::string> out;
    for (const auto& s : bp.set.states) {
        CVector v = oracle::input(s, res, g);
        const MeasurementNode* n = bp.root.get();
        for (const auto& step : path) {
            const Outcome* hit = nullptr;
            for (const auto& o : n->outcomes)
                if (o.name == step)
                    hit = &o;
            if (!hit)
                throw std::logic_error("no outcome " + step);
            v = oracle::apply_local(hit->projector.matrix(), v, g, index_of(n->party));
            n = hit->next.get();
            if (!n)
                break;
        }
        if (v.squaredNorm() > 1e-12)
            out.insert(s.key());
    }
    return out;
}

void expect_matches_oracle(const StateSet& set, const ResourceState& res, const MeasurementNode& root,
                           const ProtocolReport& rep)
{
    ASSERT_EQ(rep.states.size(), set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        oracle::WalkResult w = oracle::walk(set.states[i], res, root, set);
        EXPECT_NEAR(w.success, rep.states[i].success, 1e-12) << set.states[i].label;
        EXPECT_NEAR(w.total, 1.0, 1e-9) << set.states[i].label;
    }
}

}  // namespace

// --- simulator -------------------------------------------------------------

TEST(Simulator, ComputationalBasisNeedsNoEntanglement)
{
    StateSet s = gen_product_basis(2, 3, 2);
    NodePtr t = z_tree(s);
    ProtocolReport r = run_protocol(s, ResourceState::none(), *t);
    EXPECT_TRUE(r.perfect);
    EXPECT_NEAR(r.overall_success, 1.0, 1e-15);
    EXPECT_TRUE(r.warnings.empty());
    expect_matches_oracle(s, ResourceState::none(), *t, r);
    EXPECT_EQ(r.node_count, 1u + 2u + 6u);
}

TEST(Simulator, MislabeledLeafIsCaught)
{
    StateSet s = gen_product_basis(2, 2, 2);
    ProtocolReport r = run_protocol(s, ResourceState::none(), *z_tree(s, true));
    EXPECT_FALSE(r.perfect);
    EXPECT_NEAR(r.overall_success, 0.0, 1e-15);
    std::size_t failed = 0;
    for (const auto& st : r.states)
        failed += st.success < 0.5;
    EXPECT_EQ(failed, 2u);
}

TEST(Simulator, EmptySetIsVacuouslyPerfect)
{
    StateSet s = gen_product_basis(2, 2, 2);
    NodePtr t = z_tree(s);
    s.states.clear();
    ProtocolReport r = run_protocol(s, ResourceState::none(), *t);
    EXPECT_TRUE(r.perfect);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_EQ(r.warnings[0], "empty state set");
}

TEST(Simulator, UnguessedLeafWarnsOrThrowsInStrictMode)
{
    using namespace build;
    StateSet s = gen_product_basis(2, 1, 1);
    const Space SA{2, 0};
    NodePtr t = Node(Party::A).on("a0", lv(SA, 0), leaf("|0>|0>|0>")).rest("a1", unreachable());
    ProtocolReport r = run_protocol(s, ResourceState::none(), *t);
    EXPECT_FALSE(r.perfect);
    EXPECT_NEAR(r.states[1].undefined_mass, 1.0, 1e-15);
    EXPECT_FALSE(r.warnings.empty());
    RunOptions strict;
    strict.strict = true;
    EXPECT_THROW(run_protocol(s, ResourceState::none(), *t, strict), ProtocolError);
}

TEST(Simulator, ValidateTreeRejectsMalformedMeasurements)
{
    using namespace build;
    StateSet s = gen_product_basis(3, 1, 1);
    const Space SA{3, 0};
    const FactorLayout L{{3, 1, 1}, {0, 0, 0}};
    // wrong dimension
    EXPECT_THROW(validate_tree(*Node(Party::A).on("x", Operator::identity(2), leaf("k")).done(), L), ProtocolError);
    // overlapping outcomes
    EXPECT_THROW(validate_tree(*Node(Party::A)
                                    .on("x", lv(SA, 0) + lv(SA, 1), leaf("k"))
                                    .on("y", lv(SA, 1) + lv(SA, 2), leaf("k"))
                                    .done(),
                               L),
                 ProtocolError);
    // incomplete
    EXPECT_THROW(validate_tree(*Node(Party::A).on("x", lv(SA, 0), leaf("k")).done(), L), ProtocolError);
    // not a projector
    EXPECT_THROW(validate_tree(*Node(Party::A).on("x", Operator(CMatrix::Identity(3, 3) * 2.0), leaf("k")).done(), L),
                 ProtocolError);
    // error names the path
    try {
        validate_tree(*Node(Party::A).on("top", lv(SA, 0), Node(Party::B).on("inner", lv(SA, 0), leaf("k")).done())
                           .rest("r", unreachable()),
                      L);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_NE(std::string(e.what()).find("top"), std::string::npos);
    }
    EXPECT_THROW(run_protocol(s, ResourceState::none(), *Node(Party::A).on("x", lv(SA, 0), leaf("k")).done()),
                 ProtocolError);
}

TEST(Simulator, ReportsAreDeterministic)
{
    BuiltinProtocol bp = builtin_bell_c6();
    ProtocolReport a = bp.run(), b = bp.run();
    ASSERT_EQ(a.states.size(), b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        EXPECT_EQ(a.states[i].success, b.states[i].success);
        EXPECT_EQ(a.states[i].branches.size(), b.states[i].branches.size());
        for (std::size_t j = 0; j < a.states[i].branches.size(); ++j) {
            EXPECT_EQ(a.states[i].branches[j].path, b.states[i].branches[j].path);
            EXPECT_EQ(a.states[i].branches[j].probability, b.states[i].branches[j].probability);
        }
    }
}

TEST(Resources, GhzAndBellKets)
{
    ResourceState g = ResourceState::ghz3();
    EXPECT_EQ(g.total_qubits(), 3u);
    EXPECT_NEAR(std::abs(g.ket()[0]), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(std::abs(g.ket()[7]), 1 / std::sqrt(2.0), 1e-15);
    ResourceState b = ResourceState::bell(Party::A, Party::C);
    EXPECT_EQ(b.qubits(), (std::array<std::size_t, 3>{1, 0, 1}));
    EXPECT_EQ(b.holders(), (std::vector<Party>{Party::A, Party::C}));
    ResourceState u = g.unentangled();
    EXPECT_FALSE(u.entangled());
    EXPECT_EQ(u.qubits(), g.qubits());
    EXPECT_EQ(u.ket()[0], Complex(1.0));
    // two copies: qubit 0 of a and b is the first pair
    ResourceState two = ResourceState::bell_copies(Party::A, Party::B, 2);
    EXPECT_EQ(two.qubits(), (std::array<std::size_t, 3>{2, 2, 0}));
    EXPECT_NEAR(two.ket().norm(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(two.ket()[0b1010]), 0.5, 1e-15);
    EXPECT_NEAR(std::abs(two.ket()[0b1001]), 0.0, 1e-15);
}

// --- builtin protocols -----------------------------------------------------

TEST(GhzC6, PerfectAndAgreesWithOracle)
{
    BuiltinProtocol bp = builtin_ghz_c6();
    ProtocolReport r = bp.run();
    EXPECT_TRUE(r.perfect);
    EXPECT_LE(r.max_conservation_error, 1e-9);
    EXPECT_GT(r.reconstructed_nodes, 0u);
    EXPECT_EQ(count_pending(*bp.root), 0u);
    expect_matches_oracle(bp.set, bp.resource, *bp.root, r);
    EXPECT_LT(max_branch_overlap(bp.set, bp.resource, *bp.root), 1e-12);
}

TEST(GhzC6, RootSplitsHalfTheSpace)
{
    BuiltinProtocol bp = builtin_ghz_c6();
    EXPECT_EQ(bp.root->party, Party::C);
    ASSERT_EQ(bp.root->outcomes.size(), 2u);
    EXPECT_EQ(bp.root->outcomes[0].projector.rank(), 6u);
    EXPECT_EQ(bp.root->outcomes[1].projector.rank(), 6u);
}

TEST(GhzC6, BranchesIsolateTheListedStates)
{
    BuiltinProtocol bp = builtin_ghz_c6();
    EXPECT_EQ(reaching(bp, bp.resource, {"C1", "B1"}),
              (std::set<std::string>{"|0+1>|0>|3>", "|0-1>|0>|3>", "|2+3>|0>|3>"}));
    EXPECT_EQ(reaching(bp, bp.resource, {"C1", "B3", "C31"}), (std::set<std::string>{"|2+3>|2>|3>", "|2-3>|2>|3>"}));
    EXPECT_EQ(reaching(bp, bp.resource, {"C1", "B4", "A41"}),
              (std::set<std::string>{"|0>|3>|0+1>", "|0>|3>|0-1>", "|0>|3>|2+3>"}));
}

TEST(GhzC6, NoEntanglementNoPerfectDiscrimination)
{
    BuiltinProtocol bp = builtin_ghz_c6();
    ProtocolReport r = run_protocol(bp.set, bp.resource.unentangled(), *bp.root);
    EXPECT_FALSE(r.perfect);
    EXPECT_NEAR(r.overall_success, 0.5, 1e-9);
}

TEST(GhzC2d, MatchesTheC6TreeAtDThree)
{
    BuiltinProtocol small = builtin_ghz_c2d(3), c6 = builtin_ghz_c6();
    ProtocolReport a = small.run(), b = c6.run();
    EXPECT_TRUE(a.perfect);
    ASSERT_EQ(a.states.size(), b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        const StateResult* other = nullptr;
        for (const auto& s : b.states)
            if (s.key == a.states[i].key)
                other = &s;
        ASSERT_NE(other, nullptr) << a.states[i].key;
        EXPECT_NEAR(a.states[i].success, other->success, 1e-12);
    }
}

TEST(GhzC2d, PerfectForLargerD)
{
    for (int d : {4, 5}) {
        BuiltinProtocol bp = builtin_ghz_c2d(d);
        EXPECT_EQ(bp.root->outcomes[0].projector.rank(), static_cast<std::size_t>(2 * d));
        ProtocolReport r = bp.run();
        EXPECT_TRUE(r.perfect) << "d=" << d;
        EXPECT_LT(max_branch_overlap(bp.set, bp.resource, *bp.root), 1e-12);
    }
}

TEST(GhzOdd, PerfectOnSeveralShapes)
{
    for (auto [k, l, m] : {std::array<int, 3>{2, 2, 2}, {2, 3, 2}, {3, 2, 2}, {3, 3, 3}}) {
        BuiltinProtocol bp = builtin_ghz_odd(k, l, m);
        EXPECT_EQ(bp.root->outcomes[0].projector.rank(), static_cast<std::size_t>(2 * m + 1));
        ProtocolReport r = bp.run();
        EXPECT_TRUE(r.perfect) << k << l << m;
        if (k == 2 && l == 2 && m == 2)
            expect_matches_oracle(bp.set, bp.resource, *bp.root, r);
    }
}

TEST(BellC6, PerfectWithTheFirstHolderMoving)
{
    BuiltinProtocol bp = builtin_bell_c6();
    EXPECT_EQ(bp.root->party, Party::A);
    ProtocolReport r = bp.run();
    EXPECT_TRUE(r.perfect);
    expect_matches_oracle(bp.set, bp.resource, *bp.root, r);
    EXPECT_LT(max_branch_overlap(bp.set, bp.resource, *bp.root), 1e-12);
}

TEST(BellC6, CyclicRelabelingMovesThePair)
{
    BuiltinProtocol bp = builtin_bell_c6();
    NodePtr once = cyclic_relabel(*bp.root), twice = cyclic_relabel(*once);
    EXPECT_TRUE(run_protocol(bp.set, ResourceState::bell(Party::B, Party::C), *once).perfect);
    EXPECT_TRUE(run_protocol(bp.set, ResourceState::bell(Party::C, Party::A), *twice).perfect);
    // the rotated tree still needs the rotated pair
    EXPECT_THROW(run_protocol(bp.set, bp.resource, *once), ProtocolError);
}

TEST(BellC6, NonHolderFirstMoverFails)
{
    BuiltinProtocol bp = builtin_bell_c6();
    ResourceState res = ResourceState::compose({ResourceComponent::idle(Party::A), ResourceComponent::bell(Party::B, Party::C)},
                                               "bell:BC+idle:A");
    NodePtr t = extend_ancillas(*bp.root, bp.layout(), res.layout(bp.set.dims));
    ProtocolReport r = run_protocol(bp.set, res, *t);
    EXPECT_FALSE(r.perfect);
    EXPECT_LT(r.overall_success, 0.9);
    expect_matches_oracle(bp.set, res, *t, r);
}

TEST(Bell2Odd, TwoCopiesPerfectOneCopyNot)
{
    BuiltinProtocol bp = builtin_bell2_odd(2, 2, 2);
    ProtocolReport full = bp.run();
    EXPECT_TRUE(full.perfect);
    expect_matches_oracle(bp.set, bp.resource, *bp.root, full);

    ProtocolReport cut = run_protocol(bp.set, bell2_truncated(), *bp.root);
    EXPECT_FALSE(cut.perfect);
    // only states that go on to the second stage are hurt
    for (const auto& s : cut.states) {
        bool second_stage = false;
        for (const auto& b : s.branches)
            second_stage |= b.path.find("C3") != std::string::npos;
        if (!second_stage)
            EXPECT_NEAR(s.success, 1.0, 1e-9) << s.label;
    }
    std::size_t hurt = 0;
    for (const auto& s : cut.states)
        hurt += s.success < 1.0 - 1e-9;
    EXPECT_GT(hurt, 0u);
}

// The two-stage tree spends the second copy, but a single copy already
// suffices for this size: the first split plus the completion search.
TEST(Bell2Odd, SingleCopyCompletionExists)
{
    using namespace build;
    StateSet set = gen_theorem3(2, 2, 2);
    ResourceState one = ResourceState::bell(Party::A, Party::B);
    const Space SA{5, 1};
    NodePtr half = Node(Party::A).on("A1", levels(SA, 0, 4, "0") + lv(SA, 4, "1"), hole()).rest("A2", hole());
    NodePtr t = fill_pending(*half, set, one);
    ProtocolReport r = run_protocol(set, one, *t);
    EXPECT_TRUE(r.perfect);
    expect_matches_oracle(set, one, *t, r);
}

TEST(Completion, FailsOnInseparableSurvivors)
{
    const FactorLayout L{{2, 1, 1}, {0, 0, 0}};
    std::vector<Survivor> sv{{"a", basis_ket(2, 0)}, {"b", pm_ket(2, 0, Sign::Plus)}};
    EXPECT_THROW(complete_discrimination(sv, L), CompletionError);
    Continuation c = complete_discrimination({{"a", basis_ket(2, 0)}, {"a", basis_ket(2, 1)}}, L);
    EXPECT_EQ(c.node, nullptr);
    EXPECT_EQ(c.guess, std::optional<std::string>("a"));
}

TEST(Transforms, FlipAllAncillasIsAnInvolution)
{
    BuiltinProtocol bp = builtin_ghz_c6();
    NodePtr back = flip_all_ancillas(*flip_all_ancillas(*bp.root, bp.layout()), bp.layout());
    std::vector<const MeasurementNode*> a, b;
    for_each_node(*bp.root, [&](const MeasurementNode& n) { a.push_back(&n); });
    for_each_node(*back, [&](const MeasurementNode& n) { b.push_back(&n); });
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i]->outcomes.size(); ++j)
            EXPECT_LT((a[i]->outcomes[j].projector.matrix() - b[i]->outcomes[j].projector.matrix()).norm(), 1e-15);
    EXPECT_THROW(extend_ancillas(*bp.root, bp.layout(), FactorLayout{{6, 6, 6}, {0, 0, 0}}), ProtocolError);
}
