#ifndef LOCCLAB_SERIALIZE_HPP
#define LOCCLAB_SERIALIZE_HPP

#include "locclab/oppovm.hpp"
#include "locclab/protocol.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>
#include <string>

// JSON field names and CSV columns here are a compatibility contract; see
// the README before renaming anything. nlohmann::json writes doubles in the
// shortest form that reads back to the same bits.

namespace locc {

using Json = nlohmann::json;

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

// ---------------------------------------------------------------------------
// kets and state sets

inline Json ket_to_json(const Ket& k)
{
    Json a = Json::array();
    for (std::size_t i = 0; i < k.dim(); ++i)
        a.push_back({k[i].real(), k[i].imag()});
    return a;
}

inline Ket ket_from_json(const Json& j)
{
    if (!j.is_array() || j.empty())
        throw std::invalid_argument("ket must be a non-empty array of [re, im] pairs");
    CVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Json& z = j[i];
        if (z.is_number())
            v(static_cast<Eigen::Index>(i)) = z.get<double>();
        else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number())
            v(static_cast<Eigen::Index>(i)) = Complex(z[0].get<double>(), z[1].get<double>());
        else
            throw std::invalid_argument("ket entry " + std::to_string(i) + " is not a number or [re, im] pair");
    }
    return Ket(std::move(v));
}

inline Json params_to_json(const FamilyParams& p)
{
    return {{"d", p.d}, {"k", p.k}, {"l", p.l}, {"m", p.m}};
}

inline FamilyParams params_from_json(const Json& j)
{
    FamilyParams p;
    if (j.is_null())
        return p;
    if (!j.is_object())
        throw std::invalid_argument("params must be an object");
    p.d = j.value("d", 0);
    p.k = j.value("k", 0);
    p.l = j.value("l", 0);
    p.m = j.value("m", 0);
    return p;
}

inline Json to_json(const StateSet& s)
{
    Json states = Json::array();
    for (const auto& st : s.states)
        states.push_back({{"label", st.label},
                          {"factors", {ket_to_json(st.factors[0]), ket_to_json(st.factors[1]),
                                       ket_to_json(st.factors[2])}}});
    return {{"family", family_name(s.family)},
            {"params", params_to_json(s.params)},
            {"dims", {s.dims[0], s.dims[1], s.dims[2]}},
            {"states", std::move(states)}};
}

inline StateSet state_set_from_json(const Json& j)
{
    if (!j.is_object())
        throw std::invalid_argument("state set must be a JSON object");
    if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].size() != 3)
        throw std::invalid_argument("state set needs \"dims\": [dA, dB, dC]");
    if (!j.contains("states") || !j["states"].is_array())
        throw std::invalid_argument("state set needs a \"states\" array");
    StateSet s;
    s.family = family_from_name(j.value("family", std::string("custom")));
    s.params = params_from_json(j.contains("params") ? j["params"] : Json());
    for (std::size_t p = 0; p < 3; ++p) {
        if (!j["dims"][p].is_number_unsigned())
            throw std::invalid_argument("dims must be positive integers");
        s.dims[p] = j["dims"][p].get<std::size_t>();
    }
    for (const auto& e : j["states"]) {
        if (!e.is_object() || !e.contains("factors") || !e["factors"].is_array() || e["factors"].size() != 3)
            throw std::invalid_argument("each state needs \"factors\": [a, b, c]");
        ProductState st;
        st.label = e.value("label", "s" + std::to_string(s.states.size() + 1));
        for (std::size_t p = 0; p < 3; ++p)
            st.factors[p] = ket_from_json(e["factors"][p]);
        s.states.push_back(std::move(st));
    }
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// verifier output

inline Json to_json(const NonlocalityVerdict& v)
{
    Json per = Json::array();
    for (const auto& p : v.per_party)
        per.push_back({{"party", std::string(1, party_char(p.party))},
                       {"dim", p.dim},
                       {"trivial", p.trivial},
                       {"identity_residual", p.identity_residual},
                       {"constraint_rows", p.constraint_rows}});
    return {{"family", family_name(v.family)},
            {"params", params_to_json(v.params)},
            {"dims", {v.dims[0], v.dims[1], v.dims[2]}},
            {"count", v.state_count},
            {"orthogonal", true},
            {"per_party", std::move(per)},
            {"verdict", v.verdict()}};
}

inline Json orthogonality_failure_json(const StateSet& s, const OrthogonalityReport& r, std::size_t max_listed = 20)
{
    Json viol = Json::array();
    for (std::size_t i = 0; i < r.violations.size() && i < max_listed; ++i) {
        const auto& v = r.violations[i];
        viol.push_back({{"i", s.states[v.i].label}, {"j", s.states[v.j].label}, {"overlap", v.overlap}});
    }
    return {{"family", family_name(s.family)},
            {"params", params_to_json(s.params)},
            {"dims", {s.dims[0], s.dims[1], s.dims[2]}},
            {"count", s.size()},
            {"orthogonal", false},
            {"max_overlap", r.max_overlap},
            {"violation_count", r.violations.size()},
            {"violations", std::move(viol)},
            {"verdict", "not-orthogonal"}};
}

inline std::string verdict_csv(const NonlocalityVerdict& v)
{
    std::ostringstream os;
    os << "party,dim,trivial,identity_residual,constraint_rows\n";
    for (const auto& p : v.per_party)
        os << party_char(p.party) << ',' << p.dim << ',' << (p.trivial ? "true" : "false") << ','
           << fmt17(p.identity_residual) << ',' << p.constraint_rows << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// trees

inline Json operator_to_json(const Operator& op)
{
    // sparse: [[row, col, re, im], ...]
    Json entries = Json::array();
    for (std::size_t i = 0; i < op.dim(); ++i)
        for (std::size_t j = 0; j < op.dim(); ++j) {
            Complex z = op(i, j);
            if (z != 0.0)
                entries.push_back({i, j, z.real(), z.imag()});
        }
    return {{"dim", op.dim()}, {"entries", std::move(entries)}};
}

inline Operator operator_from_json(const Json& j)
{
    const std::size_t d = j.at("dim").get<std::size_t>();
    if (d == 0)
        throw std::invalid_argument("operator dimension must be positive");
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (const auto& e : j.at("entries")) {
        auto r = e.at(0).get<std::size_t>(), c = e.at(1).get<std::size_t>();
        if (r >= d || c >= d)
            throw std::invalid_argument("operator entry outside its dimension");
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = Complex(e.at(2).get<double>(), e.at(3).get<double>());
    }
    return Operator(std::move(m));
}

inline Json to_json(const MeasurementNode& n)
{
    Json outs = Json::array();
    for (const auto& o : n.outcomes)
        outs.push_back({{"name", o.name},
                        {"residual", o.residual},
                        {"pending", o.pending},
                        {"guess", o.guess ? Json(*o.guess) : Json()},
                        {"projector", operator_to_json(o.projector)},
                        {"next", o.next ? to_json(*o.next) : Json()}});
    return {{"party", std::string(1, party_char(n.party))},
            {"reconstructed", n.reconstructed},
            {"note", n.note},
            {"outcomes", std::move(outs)}};
}

inline NodePtr tree_from_json(const Json& j)
{
    auto n = std::make_shared<MeasurementNode>();
    const std::string party = j.at("party").get<std::string>();
    if (party.size() != 1)
        throw std::invalid_argument("party must be one of A, B, C");
    n->party = party_from_char(party[0]);
    n->reconstructed = j.value("reconstructed", false);
    n->note = j.value("note", std::string());
    for (const auto& e : j.at("outcomes")) {
        Outcome o;
        o.name = e.value("name", std::string());
        o.residual = e.value("residual", false);
        o.pending = e.value("pending", false);
        if (e.contains("guess") && !e["guess"].is_null())
            o.guess = e["guess"].get<std::string>();
        o.projector = operator_from_json(e.at("projector"));
        if (e.contains("next") && !e["next"].is_null())
            o.next = tree_from_json(e["next"]);
        n->outcomes.push_back(std::move(o));
    }
    return n;
}

// ---------------------------------------------------------------------------
// protocol reports

inline Json to_json(const ProtocolReport& r)
{
    Json states = Json::array();
    for (const auto& s : r.states) {
        Json br = Json::array();
        for (const auto& b : s.branches)
            br.push_back({{"path", b.path},
                          {"probability", b.probability},
                          {"guess", b.guess ? Json(*b.guess) : Json()},
                          {"correct", b.correct}});
        states.push_back({{"label", s.label},
                          {"key", s.key},
                          {"success", s.success},
                          {"undefined_mass", s.undefined_mass},
                          {"conservation_error", s.conservation_error},
                          {"branches", std::move(br)}});
    }
    return {{"protocol", r.protocol},
            {"resource", r.resource},
            {"family", family_name(r.family)},
            {"params", params_to_json(r.params)},
            {"dims", {r.dims[0], r.dims[1], r.dims[2]}},
            {"perfect", r.perfect},
            {"overall_success", r.overall_success},
            {"max_conservation_error", r.max_conservation_error},
            {"node_count", r.node_count},
            {"reconstructed_nodes", r.reconstructed_nodes},
            {"warnings", r.warnings},
            {"states", std::move(states)}};
}

inline std::string report_csv(const ProtocolReport& r)
{
    std::ostringstream os;
    os << "label,key,success,undefined_mass,conservation_error,branches\n";
    for (const auto& s : r.states)
        os << csv_field(s.label) << ',' << csv_field(s.key) << ',' << fmt17(s.success) << ',' << fmt17(s.undefined_mass) << ','
           << fmt17(s.conservation_error) << ',' << s.branches.size() << '\n';
    return os.str();
}

}  // namespace locc

#endif  // LOCCLAB_SERIALIZE_HPP
