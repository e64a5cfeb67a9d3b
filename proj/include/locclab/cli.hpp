#ifndef LOCCLAB_CLI_HPP
#define LOCCLAB_CLI_HPP

#include "locclab/builtin_protocols.hpp"
#include "locclab/parallel.hpp"
#include "locclab/render.hpp"
#include "locclab/serialize.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace locc {

// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitNotOrthogonal = 2,
    kExitNegative = 3,  // verify: nontrivial solution; simulate: imperfect
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace cli {

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot write '" + path + "'");
    out << text;
    if (!out)
        throw UsageError("write to '" + path + "' failed");
}

inline Json parse_json(const std::string& text, const std::string& what)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw UsageError(what + ": " + e.what());
    }
}

inline StateSet load_set(const std::string& path)
{
    Json j = parse_json(read_file(path), path);
    try {
        return state_set_from_json(j);
    } catch (const Json::exception& e) {
        throw UsageError(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(path + ": " + e.what());
    }
}

// stdout when no path is given
inline void emit(std::ostream& out, const std::string& path, const std::string& text)
{
    if (path.empty())
        out << text;
    else
        write_file(path, text);
}

inline Party parse_party(char c)
{
    try {
        return party_from_char(c);
    } catch (const std::exception&) {
        throw UsageError(std::string("unknown party '") + c + "'");
    }
}

struct ResourceSpec {
    enum class Kind { Ghz, Bell, Bell2, Bell1, None } kind = Kind::None;
    Party p = Party::A, q = Party::B;
};

// ghz | bell:XY | bell2:XY | bell1:XY | none
inline ResourceSpec parse_resource(const std::string& s)
{
    ResourceSpec r;
    if (s == "ghz") {
        r.kind = ResourceSpec::Kind::Ghz;
        return r;
    }
    if (s == "none")
        return r;
    auto colon = s.find(':');
    std::string head = s.substr(0, colon);
    if (colon == std::string::npos || s.size() != colon + 3)
        throw UsageError("unknown resource '" + s + "' (expected ghz, bell:XY, bell2:XY, bell1:XY or none)");
    if (head == "bell")
        r.kind = ResourceSpec::Kind::Bell;
    else if (head == "bell2")
        r.kind = ResourceSpec::Kind::Bell2;
    else if (head == "bell1")
        r.kind = ResourceSpec::Kind::Bell1;
    else
        throw UsageError("unknown resource '" + s + "'");
    r.p = parse_party(s[colon + 1]);
    r.q = parse_party(s[colon + 2]);
    if (r.p == r.q)
        throw UsageError("a Bell pair needs two different parties");
    return r;
}

inline std::size_t half_odd(std::size_t d, char party)
{
    if (d < 5 || d % 2 == 0)
        throw UsageError(std::string("dimension of ") + party + " must be 2n+1 with n >= 2, got " + std::to_string(d));
    return (d - 1) / 2;
}

struct Prepared {
    StateSet set;
    ResourceState resource;
    NodePtr root;
    std::string protocol;
};

inline void require_same(const StateSet& loaded, const StateSet& builtin, const std::string& protocol)
{
    if (!same_states(loaded, builtin, 1e-10))
        throw UsageError("protocol " + protocol + " does not apply to this state set (it expects the " +
                         std::string(family_name(builtin.family)) + " states with dims " +
                         std::to_string(builtin.dims[0]) + "x" + std::to_string(builtin.dims[1]) + "x" +
                         std::to_string(builtin.dims[2]) + ")");
}

inline void require_resource(bool ok, const std::string& protocol, const std::string& wanted, const std::string& got)
{
    if (!ok)
        throw UsageError("resource mismatch: protocol " + protocol + " needs " + wanted + ", got " + got);
}

// Builds the tree and resource for a builtin protocol against a loaded set.
inline Prepared prepare_builtin(const StateSet& set, const std::string& protocol, const std::string& resource,
                                std::optional<char> first_mover)
{
    const ResourceSpec rs = parse_resource(resource);
    const bool none = rs.kind == ResourceSpec::Kind::None;
    if (first_mover && protocol != "bell-c6")
        throw UsageError("--first-mover applies to bell-c6 only");

    auto finish = [&](BuiltinProtocol bp) {
        require_same(set, bp.set, protocol);
        ResourceState r = none ? bp.resource.unentangled() : bp.resource;
        return Prepared{set, r, bp.root, protocol};
    };

    if (protocol == "ghz-c6" || protocol == "ghz-c2d" || protocol == "ghz-odd") {
        require_resource(none || rs.kind == ResourceSpec::Kind::Ghz, protocol, "ghz", resource);
        if (protocol == "ghz-c6")
            return finish(builtin_ghz_c6());
        if (protocol == "ghz-c2d") {
            if (set.dims[0] < 4 || set.dims[0] % 2)
                throw UsageError("ghz-c2d needs local dimension 2d with d >= 2");
            return finish(builtin_ghz_c2d(static_cast<int>(set.dims[0] / 2)));
        }
        return finish(builtin_ghz_odd(static_cast<int>(half_odd(set.dims[0], 'A')),
                                      static_cast<int>(half_odd(set.dims[1], 'B')),
                                      static_cast<int>(half_odd(set.dims[2], 'C'))));
    }

    if (protocol == "bell-c6") {
        BuiltinProtocol bp = builtin_bell_c6();
        require_same(set, bp.set, protocol);
        if (none)
            return Prepared{set, bp.resource.unentangled(), bp.root, protocol};
        require_resource(rs.kind == ResourceSpec::Kind::Bell, protocol, "bell:AB, bell:BC or bell:CA", resource);
        // the written tree starts at A with Bell(A,B); rotate it onto the pair
        const std::size_t ip = index_of(rs.p), iq = index_of(rs.q);
        const std::size_t lead = (ip + 1) % 3 == iq ? ip : iq;
        const Party start = first_mover ? parse_party(*first_mover) : kParties[lead];
        const bool holder = start == rs.p || start == rs.q;
        if (holder && index_of(start) != lead)
            throw UsageError(std::string("bell-c6 is written for the first Bell holder in cyclic order; use --first-mover ") +
                             party_char(kParties[lead]));
        NodePtr tree = bp.root;
        for (std::size_t i = 0; i < index_of(start); ++i)
            tree = cyclic_relabel(*tree);
        if (holder)
            return Prepared{set, ResourceState::bell(kParties[lead], kParties[(lead + 1) % 3]), tree, protocol};
        // Non-holder start: the tree is written for a pair the first mover is
        // part of; that party gets an idle qubit so the layout still fits.
        ResourceState r = ResourceState::compose({ResourceComponent::idle(start), ResourceComponent::bell(rs.p, rs.q)},
                                                 resource + "+idle:" + party_char(start));
        FactorLayout from = bp.layout();
        for (std::size_t i = 0; i < index_of(start); ++i)
            from = cyclic_relabel(from);
        return Prepared{set, r, extend_ancillas(*tree, from, r.layout(set.dims)), protocol};
    }

    if (protocol == "bell2-odd") {
        const bool ok = none || ((rs.kind == ResourceSpec::Kind::Bell2 || rs.kind == ResourceSpec::Kind::Bell1) &&
                                 ((rs.p == Party::A && rs.q == Party::B) || (rs.p == Party::B && rs.q == Party::A)));
        require_resource(ok, protocol, "bell2:AB (or bell1:AB for the truncated control)", resource);
        BuiltinProtocol bp = builtin_bell2_odd(static_cast<int>(half_odd(set.dims[0], 'A')),
                                               static_cast<int>(half_odd(set.dims[1], 'B')),
                                               static_cast<int>(half_odd(set.dims[2], 'C')));
        require_same(set, bp.set, protocol);
        ResourceState r = none ? bp.resource.unentangled()
                          : rs.kind == ResourceSpec::Kind::Bell1 ? bell2_truncated(Party::A, Party::B)
                                                                 : bp.resource;
        return Prepared{set, r, bp.root, protocol};
    }

    throw UsageError("unknown protocol '" + protocol + "' (ghz-c6, ghz-c2d, ghz-odd, bell-c6, bell2-odd)");
}

inline ResourceState resource_for_tree(const std::string& resource)
{
    const ResourceSpec rs = parse_resource(resource);
    switch (rs.kind) {
    case ResourceSpec::Kind::Ghz: return ResourceState::ghz3();
    case ResourceSpec::Kind::Bell: return ResourceState::bell(rs.p, rs.q);
    case ResourceSpec::Kind::Bell2: return ResourceState::bell_copies(rs.p, rs.q, 2);
    case ResourceSpec::Kind::Bell1: return bell2_truncated(rs.p, rs.q);
    case ResourceSpec::Kind::None: return ResourceState::none();
    }
    return ResourceState::none();
}

inline std::vector<int> or_default(const std::vector<int>& v) { return v.empty() ? std::vector<int>{0} : v; }

inline std::string format_of(const std::string& explicit_format, const std::string& path, const std::string& fallback)
{
    if (!explicit_format.empty())
        return explicit_format;
    auto ends = [&](const char* ext) {
        const std::string e(ext);
        return path.size() >= e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0;
    };
    if (ends(".csv"))
        return "csv";
    if (ends(".svg"))
        return "svg";
    if (ends(".txt"))
        return "ascii";
    if (ends(".json"))
        return "json";
    return fallback;
}

}  // namespace cli

inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"locc-lab: tripartite product-state families, local indistinguishability checks and "
                 "entanglement-assisted discrimination protocols"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "locc-lab 1.0.0");

    double tol = kOrthogonalityTol;
    std::uint64_t seed = 0;  // reserved; every operation is deterministic
    app.add_option("--tol", tol, "orthogonality tolerance")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "reserved, has no effect");

    // generate
    auto* gen = app.add_subcommand("generate", "write a state family as JSON");
    std::string g_family, g_out;
    int g_d = 0, g_k = 0, g_l = 0, g_m = 0;
    gen->add_option("--family", g_family, "example1 example2 t1..t6 product-basis")->required();
    gen->add_option("--d", g_d, "dimension parameter of t1/t2");
    gen->add_option("--k", g_k);
    gen->add_option("--l", g_l);
    gen->add_option("--m", g_m);
    gen->add_option("--out", g_out, "output path (stdout if omitted)");

    // verify
    auto* ver = app.add_subcommand("verify", "check orthogonality and local triviality");
    std::string v_in, v_out, v_format;
    ver->add_option("set", v_in, "state set JSON")->required();
    ver->add_option("--out", v_out);
    ver->add_option("--format", v_format)->check(CLI::IsMember({"json", "csv"}));

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a discrimination protocol on every state");
    std::string s_in, s_out, s_format, s_protocol, s_resource, s_tree, s_dump;
    std::string s_first;
    bool s_unentangled = false, s_strict = false;
    sim->add_option("set", s_in, "state set JSON")->required();
    sim->add_option("--protocol", s_protocol, "ghz-c6 ghz-c2d ghz-odd bell-c6 bell2-odd");
    sim->add_option("--tree", s_tree, "measurement tree JSON instead of a builtin");
    sim->add_option("--resource", s_resource, "ghz, bell:XY, bell2:XY, bell1:XY or none");
    sim->add_option("--first-mover", s_first, "bell-c6: party that measures first");
    sim->add_flag("--unentangled", s_unentangled, "replace the resource with |0...0> on the same qubits");
    sim->add_flag("--strict", s_strict, "treat a leaf without a guess as an error");
    sim->add_option("--dump-tree", s_dump, "write the tree that was run as JSON");
    sim->add_option("--out", s_out);
    sim->add_option("--format", s_format)->check(CLI::IsMember({"json", "csv"}));

    // render
    auto* ren = app.add_subcommand("render", "draw the set as slices of the local grid");
    std::string r_in, r_out, r_format;
    ren->add_option("set", r_in, "state set JSON")->required();
    ren->add_option("--out", r_out, "output .svg or .txt (ASCII on stdout if omitted)");
    ren->add_option("--format", r_format)->check(CLI::IsMember({"svg", "ascii"}));

    // sweep
    auto* swp = app.add_subcommand("sweep", "generate and verify over a parameter grid");
    std::string w_family, w_out;
    std::vector<int> w_d, w_k, w_l, w_m, w_kml;
    swp->add_option("--family", w_family)->required();
    swp->add_option("--d", w_d)->delimiter(',');
    swp->add_option("--k", w_k)->delimiter(',');
    swp->add_option("--l", w_l)->delimiter(',');
    swp->add_option("--m", w_m)->delimiter(',');
    swp->add_option("--kml", w_kml, "k = l = m values")->delimiter(',');
    swp->add_option("--out", w_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (gen->parsed()) {
            const Family f = family_from_name(g_family);
            StateSet s = generate(f, {g_d, g_k, g_l, g_m});
            cli::emit(out, g_out, to_json(s).dump(1) + "\n");
            (g_out.empty() ? err : out) << s.size() << " states, dims " << s.dims[0] << "x" << s.dims[1] << "x"
                                        << s.dims[2] << "\n";
            return kExitOk;
        }

        if (ver->parsed()) {
            StateSet s = cli::load_set(v_in);
            const std::string fmt = cli::format_of(v_format, v_out, "json");
            try {
                NonlocalityVerdict v = verify_nonlocality(s, tol);
                cli::emit(out, v_out, fmt == "csv" ? verdict_csv(v) : to_json(v).dump(2) + "\n");
                if (!v_out.empty())
                    out << v.verdict() << " (dims " << v.per_party[0].dim << "," << v.per_party[1].dim << ","
                        << v.per_party[2].dim << ")\n";
                return v.locally_trivial ? kExitOk : kExitNegative;
            } catch (const OrthogonalityError& e) {
                const auto& r = e.report();
                if (fmt == "csv") {
                    std::ostringstream os;
                    os << "orthogonal,max_overlap,violation_count\nfalse," << fmt17(r.max_overlap) << ','
                       << r.violations.size() << '\n';
                    cli::emit(out, v_out, os.str());
                } else {
                    cli::emit(out, v_out, orthogonality_failure_json(s, r).dump(2) + "\n");
                }
                err << "not orthogonal: " << r.violations.size() << " pairs above " << tol << "\n";
                return kExitNotOrthogonal;
            }
        }

        if (sim->parsed()) {
            StateSet s = cli::load_set(s_in);
            cli::Prepared prep;
            if (!s_tree.empty()) {
                if (!s_protocol.empty())
                    throw UsageError("--tree and --protocol are mutually exclusive");
                if (s_resource.empty())
                    throw UsageError("--tree needs an explicit --resource");
                Json j = cli::parse_json(cli::read_file(s_tree), s_tree);
                NodePtr root;
                try {
                    root = tree_from_json(j);
                } catch (const Json::exception& e) {
                    throw UsageError(s_tree + ": " + e.what());
                }
                ResourceState r = cli::resource_for_tree(s_resource);
                prep = {s, s_unentangled ? r.unentangled() : r, root, "custom"};
            } else {
                if (s_protocol.empty())
                    throw UsageError("simulate needs --protocol or --tree");
                std::string res = s_resource;
                if (res.empty())
                    res = s_protocol.rfind("ghz", 0) == 0 ? "ghz" : s_protocol == "bell-c6" ? "bell:AB" : "bell2:AB";
                std::optional<char> first;
                if (!s_first.empty()) {
                    if (s_first.size() != 1)
                        throw UsageError("--first-mover takes one of A, B, C");
                    first = s_first[0];
                }
                prep = cli::prepare_builtin(s, s_protocol, res, first);
                if (s_unentangled)
                    prep.resource = prep.resource.unentangled();
            }
            if (!s_dump.empty())
                cli::write_file(s_dump, to_json(*prep.root).dump(1) + "\n");

            RunOptions ro;
            ro.strict = s_strict;
            ro.protocol_name = prep.protocol;
            ProtocolReport rep = run_protocol(prep.set, prep.resource, *prep.root, ro);
            const std::string fmt = cli::format_of(s_format, s_out, "json");
            cli::emit(out, s_out, fmt == "csv" ? report_csv(rep) : to_json(rep).dump(2) + "\n");
            for (const auto& w : rep.warnings)
                err << "warning: " << w << "\n";
            if (!s_out.empty())
                out << (rep.perfect ? "perfect" : "imperfect") << " (overall success " << fmt17(rep.overall_success)
                    << ")\n";
            return rep.perfect ? kExitOk : kExitNegative;
        }

        if (ren->parsed()) {
            StateSet s = cli::load_set(r_in);
            const std::string fmt = cli::format_of(r_format, r_out, "ascii");
            if (fmt != "svg" && fmt != "ascii")
                throw UsageError("render writes .svg or .txt");
            FigureSpec fs = figure_spec(s);
            for (const auto& w : fs.warnings)
                err << "warning: " << w << "\n";
            cli::emit(out, r_out, fmt == "svg" ? render_svg(fs) : render_ascii(fs));
            return kExitOk;
        }

        if (swp->parsed()) {
            const Family f = family_from_name(w_family);
            std::vector<FamilyParams> points;
            if (!w_kml.empty()) {
                for (int v : w_kml)
                    points.push_back({0, v, v, v});
            } else {
                for (int d : cli::or_default(w_d))
                    for (int k : cli::or_default(w_k))
                        for (int l : cli::or_default(w_l))
                            for (int m : cli::or_default(w_m))
                                points.push_back({d, k, l, m});
            }
            // reject bad points before doing any work
            for (const auto& p : points)
                generate(f, p);

            std::vector<std::string> rows(points.size());
            parallel_for(points.size(), [&](std::size_t i) {
                const auto& p = points[i];
                const auto t0 = std::chrono::steady_clock::now();
                StateSet s = generate(f, p);
                std::ostringstream os;
                os << family_name(f) << ',' << p.d << ',' << p.k << ',' << p.l << ',' << p.m << ',' << s.size() << ','
                   << expected_count(f, p) << ',';
                try {
                    NonlocalityVerdict v = verify_nonlocality(s, tol);
                    os << "true," << v.per_party[0].dim << ',' << v.per_party[1].dim << ',' << v.per_party[2].dim
                       << ',' << v.verdict();
                } catch (const OrthogonalityError&) {
                    os << "false,,,,not-orthogonal";
                }
                const double ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
                os << ',' << fmt17(ms) << '\n';
                rows[i] = os.str();
            });
            std::string csv = "family,d,k,l,m,count,expected,orthogonal,dim_A,dim_B,dim_C,verdict,wall_ms\n";
            for (const auto& r : rows)
                csv += r;
            cli::emit(out, w_out, csv);
            return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

}  // namespace locc

#endif  // LOCCLAB_CLI_HPP
