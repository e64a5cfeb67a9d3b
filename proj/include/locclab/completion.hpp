#ifndef LOCCLAB_COMPLETION_HPP
#define LOCCLAB_COMPLETION_HPP

#include "locclab/protocol.hpp"

#include <Eigen/SVD>

#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

// Completion search for subtrees the transcription leaves open. Two kinds of
// step are tried: a support-sorting measurement, which splits survivors with
// mutually orthogonal local supports and never disturbs them, and an X-basis
// measurement on an unused ancilla qubit, kept only if it preserves
// orthogonality of the survivors. Every node it creates is marked
// reconstructed.

namespace locc {

class CompletionError : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

struct Survivor {
    std::string key;
    Ket state;  // unnormalized joint vector
};

struct CompletionOptions {
    double support_tol = 1e-9;
    double overlap_tol = 1e-9;
};

struct Continuation {
    NodePtr node;
    std::optional<std::string> guess;
};

namespace detail {

// Moves the party's factor to the row index: M(x, rest).
inline CMatrix party_matrix(const Ket& v, const std::array<std::size_t, 3>& dims, std::size_t p)
{
    const std::size_t d = dims[p];
    const std::size_t total = dims[0] * dims[1] * dims[2];
    const std::size_t rest = total / d;
    CMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rest));
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t i0 = idx / (dims[1] * dims[2]);
        std::size_t i1 = (idx / dims[2]) % dims[1];
        std::size_t i2 = idx % dims[2];
        std::size_t x = p == 0 ? i0 : p == 1 ? i1 : i2;
        std::size_t r = p == 0 ? i1 * dims[2] + i2 : p == 1 ? i0 * dims[2] + i2 : i0 * dims[1] + i1;
        m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(r)) = v.amps()(static_cast<Eigen::Index>(idx));
    }
    return m;
}

// orthonormal columns spanning the column space of m
inline CMatrix column_span(const CMatrix& m, double tol)
{
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    const double smax = s.size() ? s(0) : 0.0;
    while (r < s.size() && s(r) > tol * std::max(smax, 1e-300))
        ++r;
    return svd.matrixU().leftCols(r);
}

inline std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i)
{
    while (parent[i] != i)
        i = parent[i] = parent[parent[i]];
    return i;
}

struct SortPlan {
    std::vector<std::vector<std::size_t>> groups;  // survivor indices
    std::vector<CMatrix> spans;
};

inline SortPlan plan_sort(const std::vector<Survivor>& sv, const FactorLayout& layout, Party party,
                          const CompletionOptions& opt)
{
    const auto dims = layout.factor_dims();
    const std::size_t p = index_of(party);
    std::vector<CMatrix> supp;
    for (const auto& s : sv)
        supp.push_back(column_span(party_matrix(s.state, dims, p), opt.support_tol));

    std::vector<std::size_t> parent(sv.size());
    std::iota(parent.begin(), parent.end(), 0);
    for (std::size_t i = 0; i < sv.size(); ++i)
        for (std::size_t j = i + 1; j < sv.size(); ++j)
            if ((supp[i].adjoint() * supp[j]).cwiseAbs().maxCoeff() > opt.support_tol)
                parent[find_root(parent, j)] = find_root(parent, i);

    SortPlan plan;
    std::vector<std::size_t> slot(sv.size(), SIZE_MAX);
    for (std::size_t i = 0; i < sv.size(); ++i) {
        std::size_t r = find_root(parent, i);
        if (slot[r] == SIZE_MAX) {
            slot[r] = plan.groups.size();
            plan.groups.emplace_back();
        }
        plan.groups[slot[r]].push_back(i);
    }
    for (const auto& g : plan.groups) {
        Eigen::Index cols = 0;
        for (std::size_t i : g)
            cols += supp[i].cols();
        CMatrix all(static_cast<Eigen::Index>(dims[p]), cols);
        Eigen::Index c = 0;
        for (std::size_t i : g) {
            all.middleCols(c, supp[i].cols()) = supp[i];
            c += supp[i].cols();
        }
        plan.spans.push_back(column_span(all, opt.support_tol));
    }
    return plan;
}

inline bool pairwise_orthogonal(const std::vector<Survivor>& sv, double tol)
{
    for (std::size_t i = 0; i < sv.size(); ++i)
        for (std::size_t j = i + 1; j < sv.size(); ++j)
            if (std::abs(inner(sv[i].state, sv[j].state)) > tol)
                return false;
    return true;
}

inline Operator x_projector(const FactorLayout& layout, Party party, std::size_t qubit, Sign s)
{
    const std::size_t p = index_of(party);
    const std::size_t nq = layout.ancilla_qubits[p];
    Operator op = Operator::identity(layout.system_dims[p]);
    for (std::size_t q = 0; q < nq; ++q) {
        if (q == qubit) {
            Ket k = pm_ket(2, 0, s);
            op = kron(op, Operator::outer(k, k));
        } else {
            op = kron(op, Operator::identity(2));
        }
    }
    return op;
}

class Completer {
public:
    Completer(const FactorLayout& layout, CompletionOptions opt) : layout_(layout), opt_(opt) {}

    std::optional<Continuation> solve(const std::vector<Survivor>& sv, std::set<std::pair<int, std::size_t>> used)
    {
        std::set<std::string> keys;
        for (const auto& s : sv)
            keys.insert(s.key);
        if (keys.size() <= 1) {
            Continuation c;
            if (!keys.empty())
                c.guess = *keys.begin();
            return c;
        }

        // the party whose supports split the survivors into the most groups
        std::optional<std::pair<Party, SortPlan>> best;
        for (Party p : kParties) {
            if (layout_.factor_dim(p) == 1)
                continue;
            SortPlan plan = plan_sort(sv, layout_, p, opt_);
            if (plan.groups.size() >= 2 && (!best || plan.groups.size() > best->second.groups.size()))
                best.emplace(p, std::move(plan));
        }
        if (best)
            return sort_node(sv, best->first, best->second, used);

        for (Party p : kParties)
            for (std::size_t q = 0; q < layout_.ancilla_qubits[index_of(p)]; ++q) {
                auto tag = std::make_pair(static_cast<int>(p), q);
                if (used.count(tag))
                    continue;
                if (auto c = try_x(sv, p, q, used))
                    return c;
            }
        return std::nullopt;
    }

private:
    std::vector<Survivor> project(const std::vector<Survivor>& sv, const Operator& op, Party p) const
    {
        const auto dims = layout_.factor_dims();
        std::vector<Survivor> out;
        for (const auto& s : sv) {
            Ket w = apply_on_factor(op, s.state, dims, index_of(p));
            if (w.norm_squared() > kProbabilityFloor)
                out.push_back({s.key, std::move(w)});
        }
        return out;
    }

    std::optional<Continuation> sort_node(const std::vector<Survivor>& sv, Party p, const SortPlan& plan,
                                          const std::set<std::pair<int, std::size_t>>& used)
    {
        const std::size_t d = layout_.factor_dim(p);
        auto node = std::make_shared<MeasurementNode>();
        node->party = p;
        node->reconstructed = true;
        node->note = "support sort";
        CMatrix acc = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t g = 0; g < plan.groups.size(); ++g) {
            Outcome o;
            o.name = std::string(1, party_char(p)) + "~" + std::to_string(g);
            if (g + 1 < plan.groups.size()) {
                o.projector = Operator(plan.spans[g] * plan.spans[g].adjoint());
                acc += o.projector.matrix();
            } else {
                // last group takes the rest of the factor
                o.projector = Operator(CMatrix::Identity(acc.rows(), acc.cols()) - acc);
                o.residual = true;
            }
            auto sub = project(sv, o.projector, p);
            auto c = solve(sub, used);
            if (!c)
                return std::nullopt;
            o.next = c->node;
            o.guess = c->guess;
            node->outcomes.push_back(std::move(o));
        }
        return Continuation{node, std::nullopt};
    }

    std::optional<Continuation> try_x(const std::vector<Survivor>& sv, Party p, std::size_t q,
                                      std::set<std::pair<int, std::size_t>> used)
    {
        used.insert({static_cast<int>(p), q});
        auto node = std::make_shared<MeasurementNode>();
        node->party = p;
        node->reconstructed = true;
        node->note = "ancilla X measurement";
        for (Sign s : {Sign::Plus, Sign::Minus}) {
            Outcome o;
            o.name = std::string(1, static_cast<char>(party_char(p) - 'A' + 'a')) + std::to_string(q) +
                     (s == Sign::Plus ? "+" : "-");
            o.projector = x_projector(layout_, p, q, s);
            auto sub = project(sv, o.projector, p);
            if (!pairwise_orthogonal(sub, opt_.overlap_tol))
                return std::nullopt;
            auto c = solve(sub, used);
            if (!c)
                return std::nullopt;
            o.next = c->node;
            o.guess = c->guess;
            node->outcomes.push_back(std::move(o));
        }
        return Continuation{node, std::nullopt};
    }

    FactorLayout layout_;
    CompletionOptions opt_;
};

inline std::string key_list(const std::vector<Survivor>& sv)
{
    std::string out;
    for (const auto& s : sv)
        out += (out.empty() ? "" : ", ") + s.key;
    return out;
}

}  // namespace detail

// Finds a subtree that identifies every survivor. Throws CompletionError when
// neither step kind makes progress.
inline Continuation complete_discrimination(const std::vector<Survivor>& sv, const FactorLayout& layout,
                                            const CompletionOptions& opt = {})
{
    detail::Completer c(layout, opt);
    auto res = c.solve(sv, {});
    if (!res)
        throw CompletionError("no orthogonality-preserving completion found for {" + detail::key_list(sv) + "}");
    return *res;
}

// Replaces every pending outcome of the tree with a completion computed from
// the states of `set` that reach it.
inline NodePtr fill_pending(const MeasurementNode& root, const StateSet& set, const ResourceState& res,
                            const CompletionOptions& opt = {})
{
    const FactorLayout layout = res.layout(set.dims);
    const auto dims = layout.factor_dims();
    std::vector<Survivor> start;
    for (const auto& s : set.states)
        start.push_back({s.key(), joint_state(s, res)});

    std::function<NodePtr(const MeasurementNode&, const std::vector<Survivor>&)> rec =
        [&](const MeasurementNode& n, const std::vector<Survivor>& sv) -> NodePtr {
        auto out = std::make_shared<MeasurementNode>(n);
        for (auto& o : out->outcomes) {
            if (!o.pending && !o.next)
                continue;
            std::vector<Survivor> sub;
            for (const auto& s : sv) {
                Ket w = apply_on_factor(o.projector, s.state, dims, index_of(n.party));
                if (w.norm_squared() > kProbabilityFloor)
                    sub.push_back({s.key, std::move(w)});
            }
            if (o.pending) {
                Continuation c = complete_discrimination(sub, layout, opt);
                o.next = c.node;
                o.guess = c.guess;
                o.pending = false;
            } else {
                o.next = rec(*o.next, sub);
            }
        }
        return out;
    };
    return rec(root, start);
}

}  // namespace locc

#endif  // LOCCLAB_COMPLETION_HPP
