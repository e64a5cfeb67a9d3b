#ifndef LOCCLAB_BUILTIN_PROTOCOLS_HPP
#define LOCCLAB_BUILTIN_PROTOCOLS_HPP

#include "locclab/completion.hpp"

#include <initializer_list>
#include <string>
#include <vector>

namespace locc {

struct BuiltinProtocol {
    std::string name;
    StateSet set;
    ResourceState resource;
    NodePtr root;

    FactorLayout layout() const { return resource.layout(set.dims); }
    ProtocolReport run(const RunOptions& opt = {}) const
    {
        RunOptions o = opt;
        o.protocol_name = name;
        return run_protocol(set, resource, *root, o);
    }
};

namespace build {

// One party's system (x) ancilla factor.
struct Space {
    std::size_t sys = 1;
    std::size_t qubits = 0;
    std::size_t dim() const { return sys << qubits; }
};

// Ancilla selector, one character per qubit: '0', '1' or '*' (identity).
// An empty selector leaves every qubit untouched.
inline Operator anc_op(const Space& s, std::string_view sel)
{
    if (!sel.empty() && sel.size() != s.qubits)
        throw std::invalid_argument("ancilla selector '" + std::string(sel) + "' does not match " +
                                    std::to_string(s.qubits) + " qubit(s)");
    Operator op = Operator::identity(1);
    for (std::size_t q = 0; q < s.qubits; ++q) {
        char c = sel.empty() ? '*' : sel[q];
        if (c == '*')
            op = kron(op, Operator::identity(2));
        else if (c == '0' || c == '1') {
            Ket k = basis_ket(2, static_cast<std::size_t>(c - '0'));
            op = kron(op, Operator::outer(k, k));
        } else
            throw std::invalid_argument("bad ancilla selector character");
    }
    return op;
}

inline Operator on(const Space& s, const Ket& sys, std::string_view sel = "")
{
    return kron(Operator::outer(sys, sys), anc_op(s, sel));
}

inline Operator lv(const Space& s, std::size_t i, std::string_view sel = "")
{
    return on(s, basis_ket(s.sys, i), sel);
}

inline Operator pm(const Space& s, std::size_t i, Sign sg, std::string_view sel = "")
{
    return on(s, pm_ket(s.sys, i, sg), sel);
}

// sum of |i><i| (x) sel for i in [lo, hi)
inline Operator levels(const Space& s, std::size_t lo, std::size_t hi, std::string_view sel = "")
{
    Operator acc = Operator::zero(s.dim());
    for (std::size_t i = lo; i < hi; ++i)
        acc = acc + lv(s, i, sel);
    return acc;
}

struct Next {
    NodePtr node;
    std::optional<std::string> guess;
    bool pending = false;

    Next() = default;
    Next(NodePtr n) : node(std::move(n)) {}
};

inline Next leaf(std::string key)
{
    Next n;
    n.guess = std::move(key);
    return n;
}

inline Next hole()
{
    Next n;
    n.pending = true;
    return n;
}

// leaf that no input is expected to reach
inline Next unreachable() { return {}; }

class Node {
public:
    explicit Node(Party p, std::string note = "") : node_(std::make_shared<MeasurementNode>())
    {
        node_->party = p;
        node_->note = std::move(note);
    }

    Node& reconstructed(bool r = true)
    {
        node_->reconstructed = r;
        return *this;
    }

    Node& on(std::string name, Operator p, Next next)
    {
        Outcome o;
        o.name = std::move(name);
        o.projector = std::move(p);
        o.next = std::move(next.node);
        o.guess = std::move(next.guess);
        o.pending = next.pending;
        node_->outcomes.push_back(std::move(o));
        return *this;
    }

    // closes the node with I minus the outcomes so far
    NodePtr rest(std::string name, Next next)
    {
        if (node_->outcomes.empty())
            throw std::logic_error("rest() on a node without outcomes");
        Operator sum = Operator::zero(node_->outcomes.front().projector.dim());
        for (const auto& o : node_->outcomes)
            sum = sum + o.projector;
        on(std::move(name), Operator::identity(sum.dim()) - sum, std::move(next));
        node_->outcomes.back().residual = true;
        return node_;
    }

    NodePtr done() { return node_; }

private:
    std::shared_ptr<MeasurementNode> node_;
};

struct Pick {
    std::string name;
    Operator op;
    std::string key;
};

// Terminal measurement: each outcome names one state; whatever is left over
// goes to `rest`, unreachable unless given.
inline NodePtr pick(Party p, std::initializer_list<Pick> picks, std::optional<std::string> rest = std::nullopt)
{
    Node n(p);
    for (const auto& k : picks)
        n.on(std::string(1, party_char(p)) + ":" + k.name, k.op, leaf(k.key));
    return n.rest(std::string(1, party_char(p)) + ":rest", rest ? leaf(*rest) : unreachable());
}

inline std::string pm_name(std::size_t i, Sign s)
{
    return std::to_string(i) + (s == Sign::Plus ? "+" : "-") + std::to_string(i + 1);
}

inline std::string key3(const std::string& a, const std::string& b, const std::string& c)
{
    return "|" + a + ">|" + b + ">|" + c + ">";
}

// Pulls out the subtree under outcome `name` of the root.
inline NodePtr child(const NodePtr& root, const std::string& name)
{
    for (const auto& o : root->outcomes)
        if (o.name == name)
            return o.next;
    throw std::logic_error("no outcome " + name);
}

}  // namespace build

// ---------------------------------------------------------------------------
// GHZ-assisted protocol for the 36 states in C^6 (x) C^6 (x) C^6.

inline BuiltinProtocol builtin_ghz_c6()
{
    using namespace build;
    const Space S{6, 1};
    const Sign P = Sign::Plus, M = Sign::Minus;
    const Party pA = Party::A, pB = Party::B, pC = Party::C;

    NodePtr c1 =
        Node(pB)
            .on("B1", lv(S, 0, "1"),
                pick(pA, {{"0+1", pm(S, 0, P), "|0+1>|0>|3>"},
                          {"0-1", pm(S, 0, M), "|0-1>|0>|3>"},
                          {"2+3", pm(S, 2, P), "|2+3>|0>|3>"}}))
            .on("B2", lv(S, 1, "1"),
                pick(pA, {{"1+2", pm(S, 1, P), "|1+2>|1>|3>"}, {"1-2", pm(S, 1, M), "|1-2>|1>|3>"}}))
            .on("B3", lv(S, 2, "1"),
                Node(pC)
                    .on("C31", lv(S, 3, "1"),
                        pick(pA, {{"2+3", pm(S, 2, P), "|2+3>|2>|3>"}, {"2-3", pm(S, 2, M), "|2-3>|2>|3>"}}))
                    .on("C32", lv(S, 4, "1"),
                        pick(pA, {{"3+4", pm(S, 3, P), "|3+4>|2>|4>"}, {"3-4", pm(S, 3, M), "|3-4>|2>|4>"}}))
                    .on("C33", lv(S, 5, "1"),
                        pick(pA, {{"2+3", pm(S, 2, P), "|2+3>|2>|5>"},
                                  {"4+5", pm(S, 4, P), "|4+5>|2>|5>"},
                                  {"4-5", pm(S, 4, M), "|4-5>|2>|5>"}}))
                    .rest("C34", unreachable()))
            .rest("B4",
                  Node(pA)
                      .on("A41", lv(S, 0),
                          pick(pC, {{"0+1", pm(S, 0, P), "|0>|3>|0+1>"}, {"0-1", pm(S, 0, M), "|0>|3>|0-1>"}},
                               "|0>|3>|2+3>"))
                      .on("A42", lv(S, 1, "0"),
                          pick(pC, {{"1+2", pm(S, 1, P), "|1>|3>|1+2>"}, {"1-2", pm(S, 1, M), "|1>|3>|1-2>"}}))
                      .on("A43", lv(S, 2),
                          Node(pB)
                              .on("A43B1", lv(S, 3), hole())
                              .on("A43B2", lv(S, 4, "1"),
                                  pick(pC, {{"3+4", pm(S, 3, P), "|2>|4>|3+4>"},
                                            {"3-4", pm(S, 3, M), "|2>|4>|3-4>"}}))
                              .on("A43B3", lv(S, 5),
                                  pick(pC, {{"4+5", pm(S, 4, P), "|2>|5>|4+5>"}, {"4-5", pm(S, 4, M), "|2>|5>|4-5>"}},
                                       "|2>|5>|2+3>"))
                              .rest("A43B4", unreachable()))
                      .rest("A44",
                            Node(pC)
                                .on("C441", lv(S, 0, "0"),
                                    pick(pB, {{"0+1", pm(S, 0, P), "|3>|0+1>|0>"},
                                              {"0-1", pm(S, 0, M), "|3>|0-1>|0>"},
                                              {"2+3", pm(S, 2, P), "|3>|2+3>|0>"}}))
                                .on("C442", lv(S, 1, "0"),
                                    pick(pB, {{"1+2", pm(S, 1, P), "|3>|1+2>|1>"}, {"1-2", pm(S, 1, M), "|3>|1-2>|1>"}}))
                                .on("C443", lv(S, 2, "0"),
                                    Node(pA)
                                        .on("A4431", lv(S, 3, "0"),
                                            pick(pB, {{"2+3", pm(S, 2, P), "|3>|2+3>|2>"},
                                                      {"2-3", pm(S, 2, M), "|3>|2-3>|2>"}}))
                                        .on("A4432", lv(S, 4, "0"),
                                            pick(pB, {{"3+4", pm(S, 3, P), "|4>|3+4>|2>"},
                                                      {"3-4", pm(S, 3, M), "|4>|3-4>|2>"}}))
                                        .on("A4433", lv(S, 5, "0"),
                                            pick(pB, {{"2+3", pm(S, 2, P), "|5>|2+3>|2>"},
                                                      {"4+5", pm(S, 4, P), "|5>|4+5>|2>"},
                                                      {"4-5", pm(S, 4, M), "|5>|4-5>|2>"}}))
                                        .rest("A4434", unreachable()))
                                .rest("C444", unreachable())));

    BuiltinProtocol bp{"ghz-c6", gen_example1(), ResourceState::ghz3(), nullptr};
    const Operator C1 = levels(S, 0, 3, "0") + levels(S, 3, 6, "1");

    // fill the open branch under C1, then mirror the finished subtree
    NodePtr half = Node(pC).on("C1", C1, c1).rest("C2", unreachable());
    NodePtr filled = child(fill_pending(*half, bp.set, bp.resource), "C1");
    bp.root = Node(pC)
                  .on("C1", C1, filled)
                  .rest("C2", flip_all_ancillas(*filled, bp.layout()));
    return bp;
}

// ---------------------------------------------------------------------------
// GHZ-assisted protocol for the C^{2d} families. Only the root split is
// fixed; the rest of the C1 branch comes from the completion search.

inline BuiltinProtocol builtin_ghz_c2d(int d)
{
    using namespace build;
    StateSet set = d % 2 ? gen_theorem1(d) : gen_theorem2(d);
    const Space S{static_cast<std::size_t>(2 * d), 1};
    const auto ud = static_cast<std::size_t>(d);
    BuiltinProtocol bp{"ghz-c2d", std::move(set), ResourceState::ghz3(), nullptr};
    const Operator C1 = levels(S, 0, ud, "0") + levels(S, ud, 2 * ud, "1");
    NodePtr half = Node(Party::C).on("C1", C1, hole()).rest("C2", unreachable());
    NodePtr filled = child(fill_pending(*half, bp.set, bp.resource), "C1");
    bp.root = Node(Party::C).on("C1", C1, filled).rest("C2", flip_all_ancillas(*filled, bp.layout()));
    return bp;
}

// ---------------------------------------------------------------------------
// GHZ-assisted protocol for the C^{2k+1} (x) C^{2l+1} (x) C^{2m+1} family.

inline BuiltinProtocol builtin_ghz_odd(int k, int l, int m)
{
    using namespace build;
    StateSet set = gen_theorem3(k, l, m);
    const auto uk = static_cast<std::size_t>(k), ul = static_cast<std::size_t>(l), um = static_cast<std::size_t>(m);
    const Space SA{2 * uk + 1, 1}, SB{2 * ul + 1, 1}, SC{2 * um + 1, 1};
    const auto s = [](std::size_t v) { return std::to_string(v); };

    // L1 pairs |i+-i+1>|2l>|m>, i odd, told apart by Alice
    Node l1(Party::A);
    for (std::size_t i = 1; i < 2 * uk; i += 2)
        for (Sign sg : {Sign::Plus, Sign::Minus})
            l1.on("A:" + pm_name(i, sg), pm(SA, i, sg), leaf(key3(pm_name(i, sg), s(2 * ul), s(um))));
    // L3 pairs |k>|i+-i+1>|2m>, told apart by Bob
    Node l3(Party::B);
    for (std::size_t i = 1; i < 2 * ul; i += 2)
        for (Sign sg : {Sign::Plus, Sign::Minus})
            l3.on("B:" + pm_name(i, sg), pm(SB, i, sg), leaf(key3(s(uk), pm_name(i, sg), s(2 * um))));

    // Bob's nested split must not cut a +- pair of the |k>|i+-i+1>|0> block
    const std::size_t lsplit = ul % 2 == 0 ? ul : ul + 1;
    NodePtr nested = Node(Party::B, "nested split")
                         .reconstructed(lsplit != ul)
                         .on("B1'", levels(SB, 0, lsplit, "0"), hole())
                         .on("B2'", levels(SB, lsplit, 2 * ul, "0"), hole())
                         .rest("B3'", unreachable());

    NodePtr c1 = Node(Party::B)
                     .on("B1", lv(SB, 2 * ul, "0"), l1.rest("A:rest", unreachable()))
                     .rest("B2", Node(Party::A)
                                     .on("A1", lv(SA, uk, "1"), l3.rest("B:rest", unreachable()))
                                     .on("A2", lv(SA, 2 * uk), hole())
                                     .rest("A3", nested));

    BuiltinProtocol bp{"ghz-odd", std::move(set), ResourceState::ghz3(), nullptr};
    const Operator C1 = levels(SC, 0, 2 * um, "0") + lv(SC, 2 * um, "1");
    NodePtr half = Node(Party::C).on("C1", C1, c1).rest("C2", unreachable());
    NodePtr filled = child(fill_pending(*half, bp.set, bp.resource), "C1");
    bp.root = Node(Party::C).on("C1", C1, filled).rest("C2", flip_all_ancillas(*filled, bp.layout()));
    return bp;
}

// ---------------------------------------------------------------------------
// Bell-assisted protocol for the 36 states; the Bell pair is shared by A and B
// and Alice moves first.

inline BuiltinProtocol builtin_bell_c6()
{
    using namespace build;
    const Space S{6, 1}, SC{6, 0};
    const Sign P = Sign::Plus, M = Sign::Minus;
    const Party pA = Party::A, pB = Party::B, pC = Party::C;

    NodePtr a1 =
        Node(pB)
            .on("B1", lv(S, 1, "0"),
                pick(pA, {{"1+2", pm(S, 1, P), "|1+2>|1>|3>"}, {"1-2", pm(S, 1, M), "|1-2>|1>|3>"}}))
            .on("B2", lv(S, 4, "0"),
                pick(pC, {{"3+4", pm(SC, 3, P), "|2>|4>|3+4>"}, {"3-4", pm(SC, 3, M), "|2>|4>|3-4>"}}))
            .on("B3", lv(S, 3, "0"),
                Node(pA)
                    .on("A31", lv(S, 0, "0"),
                        pick(pC, {{"0+1", pm(SC, 0, P), "|0>|3>|0+1>"},
                                  {"0-1", pm(SC, 0, M), "|0>|3>|0-1>"},
                                  {"2+3", pm(SC, 2, P), "|0>|3>|2+3>"}}))
                    .on("A32", lv(S, 1, "0"),
                        pick(pC, {{"1+2", pm(SC, 1, P), "|1>|3>|1+2>"}, {"1-2", pm(SC, 1, M), "|1>|3>|1-2>"}}))
                    .on("A33", lv(S, 2, "0"),
                        pick(pC, {{"2+3", pm(SC, 2, P), "|2>|3>|2+3>"}, {"2-3", pm(SC, 2, M), "|2>|3>|2-3>"}}))
                    .rest("A34", unreachable()))
            .on("B4", lv(S, 5, "0"),
                pick(pC, {{"2+3", pm(SC, 2, P), "|2>|5>|2+3>"},
                          {"4+5", pm(SC, 4, P), "|2>|5>|4+5>"},
                          {"4-5", pm(SC, 4, M), "|2>|5>|4-5>"}}))
            .rest("B5",
                  Node(pC)
                      .on("C51", lv(SC, 0),
                          pick(pB, {{"0+1", pm(S, 0, P), "|3>|0+1>|0>"},
                                    {"0-1", pm(S, 0, M), "|3>|0-1>|0>"},
                                    {"2+3", pm(S, 2, P), "|3>|2+3>|0>"}}))
                      .on("C52", lv(SC, 1),
                          pick(pB, {{"1+2", pm(S, 1, P), "|3>|1+2>|1>"}, {"1-2", pm(S, 1, M), "|3>|1-2>|1>"}}))
                      .on("C53", lv(SC, 2),
                          Node(pA)
                              .on("A531", lv(S, 3, "1"),
                                  pick(pB, {{"2+3", pm(S, 2, P), "|3>|2+3>|2>"}, {"2-3", pm(S, 2, M), "|3>|2-3>|2>"}}))
                              .on("A532", lv(S, 4, "1"),
                                  pick(pB, {{"3+4", pm(S, 3, P), "|4>|3+4>|2>"}, {"3-4", pm(S, 3, M), "|4>|3-4>|2>"}}))
                              .on("A533", lv(S, 5, "1"),
                                  pick(pB, {{"2+3", pm(S, 2, P), "|5>|2+3>|2>"},
                                            {"4+5", pm(S, 4, P), "|5>|4+5>|2>"},
                                            {"4-5", pm(S, 4, M), "|5>|4-5>|2>"}}))
                              .rest("A534", unreachable()))
                      .on("C54", lv(SC, 3),
                          Node(pA)
                              .on("A541", pm(S, 0, P, "0"), leaf("|0+1>|0>|3>"))
                              .on("A542", pm(S, 0, M, "0"), leaf("|0-1>|0>|3>"))
                              .on("A543", lv(S, 2, "0") + lv(S, 3, "1"),
                                  Node(pB)
                                      .on("B5431", lv(S, 0), leaf("|2+3>|0>|3>"))
                                      .on("B5432", lv(S, 2), hole())
                                      .rest("B5433", unreachable()))
                              .rest("A544", unreachable()))
                      .on("C55", lv(SC, 4),
                          pick(pA, {{"3+4", pm(S, 3, P), "|3+4>|2>|4>"}, {"3-4", pm(S, 3, M), "|3-4>|2>|4>"}}))
                      .rest("C56", Node(pA)
                                       .on("A561", lv(S, 2, "0") + lv(S, 3, "1"), leaf("|2+3>|2>|5>"))
                                       .on("A562", pm(S, 4, P, "1"), leaf("|4+5>|2>|5>"))
                                       .on("A563", pm(S, 4, M, "1"), leaf("|4-5>|2>|5>"))
                                       .rest("A564", unreachable())));

    BuiltinProtocol bp{"bell-c6", gen_example1(), ResourceState::bell(Party::A, Party::B), nullptr};
    const Operator A1 = levels(S, 0, 3, "0") + levels(S, 3, 6, "1");
    NodePtr half = Node(pA).on("A1", A1, a1).rest("A2", unreachable());
    NodePtr filled = child(fill_pending(*half, bp.set, bp.resource), "A1");
    bp.root = Node(pA).on("A1", A1, filled).rest("A2", flip_all_ancillas(*filled, bp.layout()));
    return bp;
}

// ---------------------------------------------------------------------------
// Two Bell copies shared by A and B for the C^{2k+1} (x) C^{2l+1} (x) C^{2m+1}
// family. Qubit 0 of a and b is the first copy, qubit 1 the second.

inline BuiltinProtocol builtin_bell2_odd(int k, int l, int m)
{
    using namespace build;
    StateSet set = gen_theorem3(k, l, m);
    const auto uk = static_cast<std::size_t>(k), ul = static_cast<std::size_t>(l), um = static_cast<std::size_t>(m);
    const Space SA{2 * uk + 1, 2}, SB{2 * ul + 1, 2}, SC{2 * um + 1, 0};
    const auto s = [](std::size_t v) { return std::to_string(v); };

    Node l2(Party::C);
    for (std::size_t i = 1; i < 2 * um; i += 2)
        for (Sign sg : {Sign::Plus, Sign::Minus})
            l2.on("C:" + pm_name(i, sg), pm(SC, i, sg), leaf(key3(s(2 * uk), s(ul), pm_name(i, sg))));
    Node l3(Party::B);
    for (std::size_t i = 1; i < 2 * ul; i += 2)
        for (Sign sg : {Sign::Plus, Sign::Minus})
            l3.on("B:" + pm_name(i, sg), pm(SB, i, sg), leaf(key3(s(uk), pm_name(i, sg), s(2 * um))));

    // the same first split, now spending the second copy
    const Operator A1b = levels(SA, 0, 2 * uk, "*0") + lv(SA, 2 * uk, "*1");
    NodePtr second = Node(Party::A, "second copy").reconstructed().on("A1''", A1b, hole()).rest("A2''", hole());

    NodePtr a1 = Node(Party::B)
                     .on("B1", lv(SB, ul, "1*"), l2.rest("C:rest", unreachable()))
                     .rest("B2", Node(Party::C)
                                     .on("C1", lv(SC, 2 * um), l3.rest("B:rest", unreachable()))
                                     .on("C2", levels(SC, 0, 2), hole())
                                     .rest("C3", second));

    BuiltinProtocol bp{"bell2-odd", std::move(set), ResourceState::bell_copies(Party::A, Party::B, 2), nullptr};
    const Operator A1 = levels(SA, 0, 2 * uk, "0*") + lv(SA, 2 * uk, "1*");
    NodePtr half = Node(Party::A).on("A1", A1, a1).rest("A2", unreachable());
    NodePtr filled = child(fill_pending(*half, bp.set, bp.resource), "A1");
    std::array<std::vector<std::size_t>, 3> first_copy{{{0}, {0}, {}}};
    bp.root = Node(Party::A).on("A1", A1, filled).rest("A2", flip_ancillas(*filled, bp.layout(), first_copy));
    return bp;
}

// The first Bell copy kept, the second replaced by |00>: same qubit layout.
inline ResourceState bell2_truncated(Party p = Party::A, Party q = Party::B)
{
    return ResourceState::compose(
        {ResourceComponent::bell(p, q), ResourceComponent::idle(p), ResourceComponent::idle(q)},
        std::string("bell1+idle:") + party_char(p) + party_char(q));
}

}  // namespace locc

#endif  // LOCCLAB_BUILTIN_PROTOCOLS_HPP
