#ifndef LOCCLAB_PROTOCOL_HPP
#define LOCCLAB_PROTOCOL_HPP

#include "locclab/families.hpp"
#include "locclab/parallel.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace locc {

inline constexpr double kSuccessTol = 1e-9;
inline constexpr double kConservationTol = 1e-9;

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// System and ancilla layout of the three parties. Party P's factor is
// C^{system_dims[P]} (x) (C^2)^{ancilla_qubits[P]}, system slowest.
struct FactorLayout {
    std::array<std::size_t, 3> system_dims{};
    std::array<std::size_t, 3> ancilla_qubits{};

    std::size_t ancilla_dim(Party p) const { return std::size_t{1} << ancilla_qubits[index_of(p)]; }
    std::size_t factor_dim(Party p) const { return system_dims[index_of(p)] * ancilla_dim(p); }
    std::array<std::size_t, 3> factor_dims() const
    {
        return {factor_dim(Party::A), factor_dim(Party::B), factor_dim(Party::C)};
    }
    std::size_t total_dim() const { return factor_dim(Party::A) * factor_dim(Party::B) * factor_dim(Party::C); }
    bool operator==(const FactorLayout&) const = default;
};

// ---------------------------------------------------------------------------
// shared resources

struct ResourceComponent {
    enum class Kind { GHZ, Bell, Idle } kind = Kind::Idle;
    std::vector<Party> owners;  // one qubit per entry

    static ResourceComponent ghz() { return {Kind::GHZ, {Party::A, Party::B, Party::C}}; }
    static ResourceComponent bell(Party p, Party q)
    {
        if (p == q)
            throw std::invalid_argument("Bell pair needs two distinct parties");
        return {Kind::Bell, {p, q}};
    }
    static ResourceComponent idle(Party p) { return {Kind::Idle, {p}}; }
};

class ResourceState {
public:
    ResourceState() : ket_(basis_ket(1, 0)) {}

    static ResourceState none() { return compose({}, "none"); }
    static ResourceState ghz3() { return compose({ResourceComponent::ghz()}, "ghz"); }
    static ResourceState bell(Party p, Party q)
    {
        return compose({ResourceComponent::bell(p, q)}, std::string("bell:") + party_char(p) + party_char(q));
    }
    static ResourceState bell_copies(Party p, Party q, std::size_t copies)
    {
        std::vector<ResourceComponent> parts(copies, ResourceComponent::bell(p, q));
        return compose(std::move(parts), "bell" + std::to_string(copies) + ":" + party_char(p) + party_char(q));
    }

    // Qubits are ordered per party by component order; the joint ancilla
    // ket lists A's qubits, then B's, then C's.
    static ResourceState compose(std::vector<ResourceComponent> parts, std::string name)
    {
        ResourceState r;
        r.name_ = std::move(name);
        r.parts_ = std::move(parts);
        // (component, slot) for every qubit in party-sorted order
        std::vector<std::pair<std::size_t, std::size_t>> order;
        for (Party p : kParties)
            for (std::size_t c = 0; c < r.parts_.size(); ++c)
                for (std::size_t s = 0; s < r.parts_[c].owners.size(); ++s)
                    if (r.parts_[c].owners[s] == p) {
                        order.emplace_back(c, s);
                        ++r.qubits_[index_of(p)];
                    }
        const std::size_t n = order.size();
        if (n > 20)
            throw std::invalid_argument("resource: too many ancilla qubits");
        CVector amps(static_cast<Eigen::Index>(std::size_t{1} << n));
        for (std::size_t x = 0; x < (std::size_t{1} << n); ++x) {
            // bits of each component, gathered from x
            std::vector<std::vector<int>> bits(r.parts_.size());
            for (std::size_t c = 0; c < r.parts_.size(); ++c)
                bits[c].assign(r.parts_[c].owners.size(), 0);
            for (std::size_t q = 0; q < n; ++q)
                bits[order[q].first][order[q].second] = static_cast<int>((x >> (n - 1 - q)) & 1u);
            Complex a = 1.0;
            for (std::size_t c = 0; c < r.parts_.size() && a != 0.0; ++c)
                a *= component_amp(r.parts_[c].kind, bits[c]);
            amps(static_cast<Eigen::Index>(x)) = a;
        }
        r.ket_ = Ket(std::move(amps));
        return r;
    }

    // Same qubit layout, every qubit in |0>.
    ResourceState unentangled() const
    {
        ResourceState r;
        r.name_ = name_ + "/unentangled";
        r.qubits_ = qubits_;
        r.parts_.clear();
        for (Party p : kParties)
            for (std::size_t i = 0; i < qubits_[index_of(p)]; ++i)
                r.parts_.push_back(ResourceComponent::idle(p));
        r.ket_ = basis_ket(ket_.dim(), 0);
        return r;
    }

    const std::string& name() const { return name_; }
    const Ket& ket() const { return ket_; }
    const std::array<std::size_t, 3>& qubits() const { return qubits_; }
    const std::vector<ResourceComponent>& components() const { return parts_; }
    std::size_t total_qubits() const { return qubits_[0] + qubits_[1] + qubits_[2]; }

    bool entangled() const
    {
        for (const auto& c : parts_)
            if (c.kind != ResourceComponent::Kind::Idle)
                return true;
        return false;
    }

    std::vector<Party> holders() const
    {
        std::vector<Party> out;
        for (Party p : kParties)
            for (const auto& c : parts_)
                if (c.kind != ResourceComponent::Kind::Idle &&
                    std::find(c.owners.begin(), c.owners.end(), p) != c.owners.end()) {
                    out.push_back(p);
                    break;
                }
        return out;
    }

    FactorLayout layout(const std::array<std::size_t, 3>& system_dims) const { return {system_dims, qubits_}; }

private:
    static Complex component_amp(ResourceComponent::Kind k, const std::vector<int>& b)
    {
        if (k == ResourceComponent::Kind::Idle)
            return b[0] == 0 ? 1.0 : 0.0;
        for (int v : b)
            if (v != b[0])
                return 0.0;
        return 1.0 / std::sqrt(2.0);
    }

    std::string name_ = "none";
    std::array<std::size_t, 3> qubits_{};
    std::vector<ResourceComponent> parts_;
    Ket ket_;
};

// |system state> (x) |resource>, laid out as (A a)(B b)(C c).
inline Ket joint_state(const ProductState& s, const ResourceState& r)
{
    const auto& q = r.qubits();
    const std::size_t na = std::size_t{1} << q[0], nb = std::size_t{1} << q[1], nc = std::size_t{1} << q[2];
    const std::size_t dA = s.factors[0].dim(), dB = s.factors[1].dim(), dC = s.factors[2].dim();
    const std::size_t fB = dB * nb, fC = dC * nc;
    CVector out = CVector::Zero(static_cast<Eigen::Index>(dA * na * fB * fC));
    const CVector& R = r.ket().amps();
    for (std::size_t xa = 0; xa < na; ++xa)
        for (std::size_t xb = 0; xb < nb; ++xb)
            for (std::size_t xc = 0; xc < nc; ++xc) {
                Complex rv = R(static_cast<Eigen::Index>((xa * nb + xb) * nc + xc));
                if (rv == 0.0)
                    continue;
                for (std::size_t i = 0; i < dA; ++i) {
                    Complex ai = s.factors[0][i] * rv;
                    if (ai == 0.0)
                        continue;
                    for (std::size_t j = 0; j < dB; ++j) {
                        Complex bj = ai * s.factors[1][j];
                        if (bj == 0.0)
                            continue;
                        const std::size_t base = ((i * na + xa) * fB + (j * nb + xb)) * fC;
                        for (std::size_t k = 0; k < dC; ++k)
                            out(static_cast<Eigen::Index>(base + k * nc + xc)) = bj * s.factors[2][k];
                    }
                }
            }
    return Ket(std::move(out));
}

// ---------------------------------------------------------------------------
// measurement trees

struct MeasurementNode;
using NodePtr = std::shared_ptr<const MeasurementNode>;

struct Outcome {
    std::string name;
    Operator projector;
    bool residual = false;  // projector is I minus the node's other outcomes
    NodePtr next;           // null: leaf
    std::optional<std::string> guess;  // state key announced at a leaf
    bool pending = false;   // hole left for the completion search

    bool is_leaf() const { return next == nullptr; }
};

struct MeasurementNode {
    Party party = Party::A;
    std::vector<Outcome> outcomes;
    bool reconstructed = false;  // produced by search rather than transcribed
    std::string note;
};

template <class Fn>
void for_each_node(const MeasurementNode& n, Fn&& fn)
{
    fn(n);
    for (const auto& o : n.outcomes)
        if (o.next)
            for_each_node(*o.next, fn);
}

inline std::size_t count_nodes(const MeasurementNode& n)
{
    std::size_t c = 0;
    for_each_node(n, [&](const MeasurementNode&) { ++c; });
    return c;
}

inline std::size_t count_reconstructed(const MeasurementNode& n)
{
    std::size_t c = 0;
    for_each_node(n, [&](const MeasurementNode& m) { c += m.reconstructed ? 1 : 0; });
    return c;
}

inline std::size_t count_pending(const MeasurementNode& n)
{
    std::size_t c = 0;
    for_each_node(n, [&](const MeasurementNode& m) {
        for (const auto& o : m.outcomes)
            c += o.pending ? 1 : 0;
    });
    return c;
}

// Projectors well formed, pairwise orthogonal and summing to identity on the
// measured factor.
inline void validate_tree(const MeasurementNode& root, const FactorLayout& layout, double tol = kProjectorTol)
{
    std::function<void(const MeasurementNode&, const std::string&)> rec = [&](const MeasurementNode& n,
                                                                              const std::string& path) {
        const std::size_t d = layout.factor_dim(n.party);
        const std::string where = path.empty() ? "root" : path;
        if (n.outcomes.empty())
            throw ProtocolError("node at " + where + " has no outcomes");
        CMatrix sum = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < n.outcomes.size(); ++i) {
            const auto& o = n.outcomes[i];
            if (o.projector.dim() != d)
                throw ProtocolError("outcome " + o.name + " at " + where + " acts on dimension " +
                                    std::to_string(o.projector.dim()) + ", party " + party_char(n.party) +
                                    " factor has dimension " + std::to_string(d));
            if (!o.projector.is_projector(tol))
                throw ProtocolError("outcome " + o.name + " at " + where + " is not a projector");
            for (std::size_t j = 0; j < i; ++j)
                if ((o.projector.matrix() * n.outcomes[j].projector.matrix()).cwiseAbs().maxCoeff() > tol)
                    throw ProtocolError("outcomes " + n.outcomes[j].name + " and " + o.name + " at " + where +
                                        " are not orthogonal");
            sum += o.projector.matrix();
        }
        const auto D = static_cast<Eigen::Index>(d);
        if ((sum - CMatrix::Identity(D, D)).cwiseAbs().maxCoeff() > tol)
            throw ProtocolError("outcomes at " + where + " do not sum to identity");
        for (const auto& o : n.outcomes)
            if (o.next)
                rec(*o.next, path.empty() ? o.name : path + "/" + o.name);
    };
    rec(root, "");
}

// ---------------------------------------------------------------------------
// tree transforms

namespace detail {

// permutation of factor indices induced by X on the chosen ancilla qubits
inline Operator conjugate_by_flip(const Operator& p, std::size_t sys_dim, std::size_t qubits, std::size_t mask)
{
    if (mask == 0)
        return p;
    const std::size_t na = std::size_t{1} << qubits;
    const std::size_t d = sys_dim * na;
    auto pi = [&](std::size_t idx) { return (idx / na) * na + ((idx % na) ^ mask); };
    CMatrix out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p(pi(i), pi(j));
    return Operator(std::move(out));
}

inline std::size_t qubit_mask(std::size_t qubits, const std::vector<std::size_t>& which)
{
    std::size_t m = 0;
    for (std::size_t q : which) {
        if (q >= qubits)
            throw std::out_of_range("ancilla qubit index out of range");
        m |= std::size_t{1} << (qubits - 1 - q);
    }
    return m;
}

template <class NodeFn>
NodePtr map_tree(const MeasurementNode& n, NodeFn&& fn)
{
    auto out = std::make_shared<MeasurementNode>(n);
    for (auto& o : out->outcomes)
        if (o.next)
            o.next = map_tree(*o.next, fn);
    fn(*out);
    return out;
}

}  // namespace detail

// Conjugates every projector by X on the listed ancilla qubits of its party.
// With a resource invariant under those flips this gives the mirror branch.
inline NodePtr flip_ancillas(const MeasurementNode& root, const FactorLayout& layout,
                             const std::array<std::vector<std::size_t>, 3>& qubits)
{
    return detail::map_tree(root, [&](MeasurementNode& n) {
        const std::size_t p = index_of(n.party);
        const std::size_t mask = detail::qubit_mask(layout.ancilla_qubits[p], qubits[p]);
        for (auto& o : n.outcomes)
            o.projector = detail::conjugate_by_flip(o.projector, layout.system_dims[p], layout.ancilla_qubits[p], mask);
    });
}

inline NodePtr flip_all_ancillas(const MeasurementNode& root, const FactorLayout& layout)
{
    std::array<std::vector<std::size_t>, 3> all;
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < layout.ancilla_qubits[p]; ++q)
            all[p].push_back(q);
    return flip_ancillas(root, layout, all);
}

// Appends identity on extra ancilla qubits so a tree written for `from`
// runs on the larger layout `to`.
inline NodePtr extend_ancillas(const MeasurementNode& root, const FactorLayout& from, const FactorLayout& to)
{
    if (from.system_dims != to.system_dims)
        throw ProtocolError("extend_ancillas: system dimensions differ");
    for (std::size_t p = 0; p < 3; ++p)
        if (to.ancilla_qubits[p] < from.ancilla_qubits[p])
            throw ProtocolError("extend_ancillas: target layout has fewer qubits");
    return detail::map_tree(root, [&](MeasurementNode& n) {
        const std::size_t p = index_of(n.party);
        const std::size_t extra = to.ancilla_qubits[p] - from.ancilla_qubits[p];
        if (extra == 0)
            return;
        Operator id = Operator::identity(std::size_t{1} << extra);
        for (auto& o : n.outcomes)
            o.projector = kron(o.projector, id);
    });
}

// Renames parties A->B, B->C, C->A and shifts leaf keys to match. Only
// meaningful when the state set is invariant under the same shift.
inline NodePtr cyclic_relabel(const MeasurementNode& root)
{
    return detail::map_tree(root, [](MeasurementNode& n) {
        n.party = static_cast<Party>((index_of(n.party) + 1) % 3);
        for (auto& o : n.outcomes)
            if (o.guess)
                o.guess = cyclic_shift_key(*o.guess);
    });
}

inline FactorLayout cyclic_relabel(const FactorLayout& l)
{
    return {{l.system_dims[2], l.system_dims[0], l.system_dims[1]},
            {l.ancilla_qubits[2], l.ancilla_qubits[0], l.ancilla_qubits[1]}};
}

// ---------------------------------------------------------------------------
// running a protocol

struct BranchRecord {
    std::string path;
    double probability = 0.0;
    std::optional<std::string> guess;
    bool correct = false;
};

struct StateResult {
    std::string label;
    std::string key;
    double success = 0.0;
    double undefined_mass = 0.0;  // mass reaching leaves without a guess
    double total_mass = 0.0;
    double conservation_error = 0.0;
    std::vector<BranchRecord> branches;
};

struct ProtocolReport {
    std::string protocol;
    std::string resource;
    Family family = Family::Custom;
    FamilyParams params;
    std::array<std::size_t, 3> dims{};
    std::vector<StateResult> states;
    double overall_success = 1.0;
    double max_conservation_error = 0.0;
    bool perfect = true;
    std::size_t node_count = 0;
    std::size_t reconstructed_nodes = 0;
    std::vector<std::string> warnings;
};

struct RunOptions {
    bool strict = false;  // throw when a leaf without a guess is reached
    std::string protocol_name = "custom";
};

inline bool verify_perfect(const ProtocolReport& r)
{
    for (const auto& s : r.states)
        if (s.success < 1.0 - kSuccessTol || s.conservation_error > kConservationTol)
            return false;
    return true;
}

inline StateResult run_single(const ProductState& s, const ResourceState& res, const MeasurementNode& root,
                              const FactorLayout& layout, const RunOptions& opt)
{
    StateResult out;
    out.label = s.label;
    out.key = s.key();
    const auto dims = layout.factor_dims();
    std::function<void(const MeasurementNode&, const Ket&, const std::string&)> walk =
        [&](const MeasurementNode& n, const Ket& v, const std::string& path) {
            const double in = v.norm_squared();
            double sum = 0.0;
            for (const auto& o : n.outcomes) {
                Ket w = apply_on_factor(o.projector, v, dims, index_of(n.party));
                const double p = w.norm_squared();
                sum += p;
                const std::string here = path.empty() ? o.name : path + "/" + o.name;
                if (p <= kProbabilityFloor) {
                    out.total_mass += p;
                    continue;
                }
                if (o.next) {
                    walk(*o.next, w, here);
                    continue;
                }
                out.total_mass += p;
                BranchRecord b{here, p, o.guess, o.guess && *o.guess == out.key};
                if (b.correct)
                    out.success += p;
                if (!o.guess) {
                    out.undefined_mass += p;
                    if (opt.strict)
                        throw ProtocolError("state " + s.label + " reached leaf " + here + " with no guess");
                }
                out.branches.push_back(std::move(b));
            }
            out.conservation_error = std::max(out.conservation_error, std::abs(sum - in));
        };
    walk(root, joint_state(s, res), "");
    out.conservation_error = std::max(out.conservation_error, std::abs(out.total_mass - 1.0));
    return out;
}

inline ProtocolReport run_protocol(const StateSet& set, const ResourceState& res, const MeasurementNode& root,
                                   const RunOptions& opt = {})
{
    set.validate();
    const FactorLayout layout = res.layout(set.dims);
    validate_tree(root, layout);

    ProtocolReport rep;
    rep.protocol = opt.protocol_name;
    rep.resource = res.name();
    rep.family = set.family;
    rep.params = set.params;
    rep.dims = set.dims;
    rep.node_count = count_nodes(root);
    rep.reconstructed_nodes = count_reconstructed(root);
    if (std::size_t holes = count_pending(root))
        rep.warnings.push_back(std::to_string(holes) + " unfilled branch(es) in the tree");
    if (set.empty()) {
        rep.warnings.push_back("empty state set");
        return rep;
    }

    rep.states.resize(set.size());
    parallel_for(set.size(), [&](std::size_t i) { rep.states[i] = run_single(set.states[i], res, root, layout, opt); });

    rep.overall_success = 1.0;
    for (const auto& s : rep.states) {
        rep.overall_success = std::min(rep.overall_success, s.success);
        rep.max_conservation_error = std::max(rep.max_conservation_error, s.conservation_error);
        if (s.undefined_mass > kProbabilityFloor)
            rep.warnings.push_back("state " + s.label + " reaches a leaf without a guess with probability " +
                                   std::to_string(s.undefined_mass));
    }
    rep.perfect = verify_perfect(rep);
    return rep;
}

// Largest |<s|t>| over distinct inputs sharing a branch, across every node
// of the tree. Zero for an orthogonality-preserving protocol.
inline double max_branch_overlap(const StateSet& set, const ResourceState& res, const MeasurementNode& root)
{
    const FactorLayout layout = res.layout(set.dims);
    const auto dims = layout.factor_dims();
    std::vector<Ket> start;
    for (const auto& s : set.states)
        start.push_back(joint_state(s, res));
    double worst = 0.0;
    std::function<void(const MeasurementNode&, const std::vector<Ket>&)> walk = [&](const MeasurementNode& n,
                                                                                    const std::vector<Ket>& vs) {
        for (const auto& o : n.outcomes) {
            std::vector<Ket> next;
            for (const auto& v : vs) {
                Ket w = apply_on_factor(o.projector, v, dims, index_of(n.party));
                if (w.norm_squared() > kProbabilityFloor)
                    next.push_back(std::move(w));
            }
            for (std::size_t i = 0; i < next.size(); ++i)
                for (std::size_t j = i + 1; j < next.size(); ++j)
                    worst = std::max(worst, std::abs(inner(next[i], next[j])));
            if (o.next && next.size() > 0)
                walk(*o.next, next);
        }
    };
    walk(root, start);
    return worst;
}

}  // namespace locc

#endif  // LOCCLAB_PROTOCOL_HPP
