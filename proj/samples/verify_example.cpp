// Builds the 36-state family in C6 x C6 x C6, checks that no party can start
// with a nontrivial orthogonality-preserving measurement, then distinguishes
// the states with a shared GHZ state.

#include "locclab.hpp"

#include <iostream>

int main()
{
    using namespace locc;

    StateSet set = gen_example1();
    NonlocalityVerdict v = verify_nonlocality(set);
    std::cout << set.size() << " states, verdict " << v.verdict() << "\n";
    for (const auto& p : v.per_party)
        std::cout << "  " << party_char(p.party) << ": solution dim " << p.dim << ", identity residual "
                  << p.identity_residual << "\n";

    BuiltinProtocol ghz = builtin_ghz_c6();
    ProtocolReport r = ghz.run();
    std::cout << "ghz-c6: " << (r.perfect ? "perfect" : "imperfect") << ", " << r.node_count << " nodes\n";

    ProtocolReport control = run_protocol(ghz.set, ghz.resource.unentangled(), *ghz.root);
    std::cout << "without entanglement: overall success " << control.overall_success << "\n";
    return r.perfect && v.locally_trivial ? 0 : 1;
}
