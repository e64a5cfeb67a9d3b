#ifndef LOCCLAB_FAMILIES_HPP
#define LOCCLAB_FAMILIES_HPP

#include "locclab/tensor.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace locc {

enum class Party : int { A = 0, B = 1, C = 2 };

inline constexpr std::array<Party, 3> kParties{Party::A, Party::B, Party::C};

inline std::size_t index_of(Party p) { return static_cast<std::size_t>(p); }
inline char party_char(Party p) { return "ABC"[index_of(p)]; }

inline Party party_from_char(char c)
{
    switch (c) {
    case 'A': case 'a': return Party::A;
    case 'B': case 'b': return Party::B;
    case 'C': case 'c': return Party::C;
    }
    throw std::invalid_argument(std::string("unknown party '") + c + "'");
}

// ---------------------------------------------------------------------------
// factor shapes

struct FactorShape {
    enum class Kind { Basis, PlusMinus, General } kind = Kind::General;
    std::size_t level = 0;  // i for |i> and |i +- i+1>
    Sign sign = Sign::Plus;
};

inline FactorShape classify_factor(const Ket& k, double tol = 1e-12)
{
    std::vector<std::size_t> nz;
    for (std::size_t i = 0; i < k.dim(); ++i)
        if (std::abs(k[i]) > tol)
            nz.push_back(i);
    if (nz.size() == 1 && std::abs(std::abs(k[nz[0]]) - 1.0) <= tol)
        return {FactorShape::Kind::Basis, nz[0], Sign::Plus};
    if (nz.size() == 2 && nz[1] == nz[0] + 1) {
        const double h = 1.0 / std::sqrt(2.0);
        Complex a = k[nz[0]], b = k[nz[1]];
        if (std::abs(std::abs(a) - h) <= tol && std::abs(std::abs(b) - h) <= tol) {
            Complex r = b / a;
            if (std::abs(r - 1.0) <= 1e-9)
                return {FactorShape::Kind::PlusMinus, nz[0], Sign::Plus};
            if (std::abs(r + 1.0) <= 1e-9)
                return {FactorShape::Kind::PlusMinus, nz[0], Sign::Minus};
        }
    }
    return {};
}

inline std::string factor_notation(const Ket& k)
{
    FactorShape s = classify_factor(k);
    switch (s.kind) {
    case FactorShape::Kind::Basis:
        return std::to_string(s.level);
    case FactorShape::Kind::PlusMinus:
        return std::to_string(s.level) + (s.sign == Sign::Plus ? "+" : "-") + std::to_string(s.level + 1);
    case FactorShape::Kind::General:
        break;
    }
    // fix the global phase on the first nonzero amplitude
    Complex ph = 1.0;
    for (std::size_t i = 0; i < k.dim(); ++i)
        if (std::abs(k[i]) > 1e-12) {
            ph = std::conj(k[i]) / std::abs(k[i]);
            break;
        }
    std::string out = "v(";
    char buf[64];
    for (std::size_t i = 0; i < k.dim(); ++i) {
        Complex z = k[i] * ph;
        double re = std::abs(z.real()) < 1e-12 ? 0.0 : z.real();
        double im = std::abs(z.imag()) < 1e-12 ? 0.0 : z.imag();
        std::snprintf(buf, sizeof buf, "%s%.9g%+.9gi", i ? "," : "", re, im);
        out += buf;
    }
    return out + ")";
}

// ---------------------------------------------------------------------------
// product states and sets

struct ProductState {
    std::string label;
    std::array<Ket, 3> factors;

    const Ket& factor(Party p) const { return factors[index_of(p)]; }

    // e.g. "|2+3>|0>|3>"
    std::string key() const
    {
        std::string k;
        for (const auto& f : factors)
            k += "|" + factor_notation(f) + ">";
        return k;
    }

    Ket joint() const { return tensor(tensor(factors[0], factors[1]), factors[2]); }
};

inline Complex overlap(const ProductState& s, const ProductState& t)
{
    return inner(s.factors[0], t.factors[0]) * inner(s.factors[1], t.factors[1]) *
           inner(s.factors[2], t.factors[2]);
}

enum class Family { Example1, Example2, T1, T2, T3, T4, T5, T6, ProductBasis, Custom };

inline std::string_view family_name(Family f)
{
    switch (f) {
    case Family::Example1: return "example1";
    case Family::Example2: return "example2";
    case Family::T1: return "t1";
    case Family::T2: return "t2";
    case Family::T3: return "t3";
    case Family::T4: return "t4";
    case Family::T5: return "t5";
    case Family::T6: return "t6";
    case Family::ProductBasis: return "product-basis";
    case Family::Custom: return "custom";
    }
    return "custom";
}

inline Family family_from_name(std::string_view s)
{
    for (Family f : {Family::Example1, Family::Example2, Family::T1, Family::T2, Family::T3, Family::T4,
                     Family::T5, Family::T6, Family::ProductBasis, Family::Custom})
        if (family_name(f) == s)
            return f;
    throw std::invalid_argument("unknown family '" + std::string(s) + "'");
}

struct FamilyParams {
    int d = 0;
    int k = 0, l = 0, m = 0;
    bool operator==(const FamilyParams&) const = default;
};

struct StateSet {
    Family family = Family::Custom;
    FamilyParams params;
    std::array<std::size_t, 3> dims{};
    std::vector<ProductState> states;

    std::size_t size() const { return states.size(); }
    bool empty() const { return states.empty(); }

    const ProductState* find_key(const std::string& key) const
    {
        for (const auto& s : states)
            if (s.key() == key)
                return &s;
        return nullptr;
    }

    // checks factor dimensions and normalization
    void validate() const
    {
        for (std::size_t p = 0; p < 3; ++p)
            if (dims[p] == 0)
                throw std::invalid_argument("StateSet: zero local dimension");
        for (const auto& s : states)
            for (std::size_t p = 0; p < 3; ++p) {
                if (s.factors[p].dim() != dims[p])
                    throw std::invalid_argument("StateSet: state '" + s.label + "' has factor " +
                                                std::string(1, "ABC"[p]) + " of dimension " +
                                                std::to_string(s.factors[p].dim()) + ", expected " +
                                                std::to_string(dims[p]));
                if (!s.factors[p].is_normalized())
                    throw std::invalid_argument("StateSet: state '" + s.label + "' factor " +
                                                std::string(1, "ABC"[p]) + " is not normalized");
            }
    }
};

// ---------------------------------------------------------------------------
// orthogonality

struct OverlapViolation {
    std::size_t i = 0, j = 0;
    double overlap = 0.0;
};

struct OrthogonalityReport {
    std::size_t pairs_checked = 0;
    double max_overlap = 0.0;
    std::vector<OverlapViolation> violations;
    bool ok() const { return violations.empty(); }
};

inline OrthogonalityReport check_orthogonality(const StateSet& set, double tol = kOrthogonalityTol)
{
    OrthogonalityReport rep;
    const auto& st = set.states;
    for (std::size_t i = 0; i < st.size(); ++i)
        for (std::size_t j = i + 1; j < st.size(); ++j) {
            double ov = std::abs(overlap(st[i], st[j]));
            ++rep.pairs_checked;
            rep.max_overlap = std::max(rep.max_overlap, ov);
            if (ov > tol)
                rep.violations.push_back({i, j, ov});
        }
    return rep;
}

// ---------------------------------------------------------------------------
// generators

namespace detail {

// one factor of a listing: |i> (pm == 0) or |i +- i+1> (pm = +1/-1)
struct Lv {
    int i;
    int pm = 0;
};

inline Lv P(int i) { return {i, +1}; }
inline Lv M(int i) { return {i, -1}; }

inline Ket make_factor(std::size_t dim, Lv f)
{
    if (f.i < 0)
        throw std::out_of_range("negative level");
    auto i = static_cast<std::size_t>(f.i);
    if (f.pm == 0)
        return basis_ket(dim, i);
    return pm_ket(dim, i, f.pm > 0 ? Sign::Plus : Sign::Minus);
}

class Listing {
public:
    Listing(std::array<std::size_t, 3> dims, std::string prefix) : dims_(dims), prefix_(std::move(prefix)) {}

    void add(Lv a, Lv b, Lv c)
    {
        ProductState s;
        s.label = prefix_ + std::to_string(states_.size() + 1);
        s.factors = {make_factor(dims_[0], a), make_factor(dims_[1], b), make_factor(dims_[2], c)};
        states_.push_back(std::move(s));
    }

    // |i+-(i+1)> in slot `slot`, both signs, plus first
    void add_pair(int slot, int i, Lv x, Lv y)
    {
        for (int sg : {+1, -1}) {
            Lv v{i, sg};
            if (slot == 0) add(v, x, y);
            else if (slot == 1) add(x, v, y);
            else add(x, y, v);
        }
    }

    StateSet finish(Family f, FamilyParams p) &&
    {
        StateSet set;
        set.family = f;
        set.params = p;
        set.dims = dims_;
        set.states = std::move(states_);
        return set;
    }

private:
    std::array<std::size_t, 3> dims_;
    std::string prefix_;
    std::vector<ProductState> states_;
};

inline std::size_t udim(int n) { return static_cast<std::size_t>(n); }

}  // namespace detail

inline StateSet gen_example1()
{
    using namespace detail;
    Listing L({6, 6, 6}, "psi");
    L.add(P(2), {0}, {3});
    L.add({3}, P(2), {0});
    L.add({0}, {3}, P(2));
    L.add(P(2), {2}, {5});
    L.add({5}, P(2), {2});
    L.add({2}, {5}, P(2));
    // +- blocks in the order 2, 3, 1, 0, 4; copies (x,y,z), (z,x,y), (y,z,x)
    auto cyc = [&](int i, int y, int z) {
        L.add_pair(0, i, {y}, {z});
        L.add_pair(1, i, {z}, {y});
        L.add_pair(2, i, {y}, {z});
    };
    cyc(2, 2, 3);
    cyc(3, 2, 4);
    cyc(1, 1, 3);
    cyc(0, 0, 3);
    cyc(4, 2, 5);
    return std::move(L).finish(Family::Example1, {});
}

inline StateSet gen_example2()
{
    using namespace detail;
    Listing L({5, 5, 5}, "phi");
    L.add_pair(0, 1, {4}, {2});
    L.add_pair(0, 3, {4}, {2});
    L.add_pair(2, 1, {4}, {2});
    L.add_pair(2, 3, {4}, {2});
    L.add_pair(1, 1, {2}, {4});
    L.add_pair(1, 3, {2}, {4});
    L.add_pair(0, 2, {0}, {2});
    L.add_pair(0, 0, {0}, {2});
    L.add_pair(1, 2, {2}, {0});
    L.add_pair(1, 0, {2}, {0});
    L.add_pair(2, 2, {0}, {2});
    L.add_pair(2, 0, {0}, {2});
    L.add({1}, {2}, {2});
    L.add({2}, {2}, {2});
    L.add({3}, {2}, {2});
    L.add({2}, {1}, {2});
    L.add({2}, {3}, {2});
    L.add({2}, {2}, {1});
    L.add({2}, {2}, {3});
    return std::move(L).finish(Family::Example2, {});
}

namespace detail {

// Shared body of the C^{2d} families; the odd/even variants differ only in
// which parity of levels carries the single |i+i+1> states.
inline StateSet gen_2d_family(int d, Family fam)
{
    struct T {
        Lv a, b, c;
    };
    std::vector<T> blk;
    for (int i = 0; i < d; ++i)
        for (int sg : {+1, -1})
            blk.push_back({{i, sg}, {i}, {d}});
    for (int i = d; i <= 2 * d - 2; ++i)
        for (int sg : {+1, -1})
            blk.push_back({{i, sg}, {d - 1}, {i + 1}});
    const bool odd = d % 2 == 1;
    for (int i = odd ? 0 : 1; i <= d - 3; i += 2)
        blk.push_back({P(d - 1), {i}, {d}});
    for (int i = odd ? 1 : 0; i <= d - 4; i += 2)
        blk.push_back({P(d - 2), {i}, {d}});
    for (int i = d + 2; i <= (odd ? 2 * d - 1 : 2 * d - 2); i += 2)
        blk.push_back({P(d - 1), {d - 1}, {i}});
    for (int i = d + 3; i <= (odd ? 2 * d - 2 : 2 * d - 1); i += 2)
        blk.push_back({P(d), {d - 1}, {i}});

    const std::size_t D = udim(2 * d);
    Listing L({D, D, D}, "phi");
    for (const auto& t : blk) L.add(t.a, t.b, t.c);
    for (const auto& t : blk) L.add(t.c, t.a, t.b);
    for (const auto& t : blk) L.add(t.b, t.c, t.a);
    FamilyParams p;
    p.d = d;
    return std::move(L).finish(fam, p);
}

inline void require(bool ok, const std::string& msg)
{
    if (!ok)
        throw std::invalid_argument(msg);
}

}  // namespace detail

inline StateSet gen_theorem1(int d)
{
    detail::require(d >= 3 && d % 2 == 1, "t1 requires odd d >= 3, got d=" + std::to_string(d));
    return detail::gen_2d_family(d, Family::T1);
}

inline StateSet gen_theorem2(int d)
{
    detail::require(d >= 4 && d % 2 == 0, "t2 requires even d >= 4, got d=" + std::to_string(d));
    return detail::gen_2d_family(d, Family::T2);
}

inline StateSet gen_theorem3(int k, int l, int m)
{
    using namespace detail;
    require(k >= 2 && l >= 2 && m >= 2, "t3 requires k,l,m >= 2");
    Listing L({udim(2 * k + 1), udim(2 * l + 1), udim(2 * m + 1)}, "phi");
    for (int i = 1; i <= 2 * k - 1; i += 2) L.add_pair(0, i, {2 * l}, {m});
    for (int i = 1; i <= 2 * m - 1; i += 2) L.add_pair(2, i, {2 * k}, {l});
    for (int i = 1; i <= 2 * l - 1; i += 2) L.add_pair(1, i, {k}, {2 * m});
    for (int i = 2; i <= 2 * k - 2; i += 2) L.add_pair(0, i, {0}, {m});
    L.add_pair(0, 0, {0}, {m});
    for (int i = 2; i <= 2 * l - 2; i += 2) L.add_pair(1, i, {k}, {0});
    L.add_pair(1, 0, {k}, {0});
    for (int i = 2; i <= 2 * m - 2; i += 2) L.add_pair(2, i, {0}, {l});
    L.add_pair(2, 0, {0}, {l});
    for (int i = 1; i <= 2 * k - 1; ++i) L.add({i}, {l}, {m});
    for (int i = 1; i <= 2 * l - 1; ++i)
        if (i != l) L.add({k}, {i}, {m});
    for (int i = 1; i <= 2 * m - 1; ++i)
        if (i != m) L.add({k}, {l}, {i});
    return std::move(L).finish(Family::T3, {0, k, l, m});
}

inline StateSet gen_theorem4(int k, int l, int m)
{
    using namespace detail;
    require(k >= 2 && l >= 2 && m >= 2, "t4 requires k,l,m >= 2");
    Listing L({udim(2 * k + 1), udim(2 * l + 1), udim(2 * m)}, "phi");
    for (int i = 1; i <= 2 * k - 1; i += 2) L.add_pair(0, i, {2 * l}, {m - 1});
    for (int i = 0; i <= 2 * k - 2; i += 2) L.add_pair(0, i, {0}, {m - 1});
    for (int i = 1; i <= 2 * l - 1; i += 2) L.add_pair(1, i, {2}, {2 * m - 1});
    for (int i = 0; i <= 2 * l - 2; i += 2) L.add_pair(1, i, {2}, {0});
    for (int i = 0; i <= 2 * m - 4; i += 2) L.add_pair(2, i, {2 * k}, {1});
    for (int i = 1; i <= 2 * m - 3; i += 2) L.add_pair(2, i, {0}, {1});
    L.add_pair(2, 2 * m - 2, {1}, {1});
    for (int i = 1; i <= 2 * k - 1; ++i) L.add({i}, {1}, {m - 1});
    for (int i = 2; i <= 2 * l - 1; ++i) L.add({2}, {i}, {m - 1});
    for (int i = 1; i <= 2 * m - 2; ++i)
        if (i != m - 1) L.add({2}, {1}, {i});
    return std::move(L).finish(Family::T4, {0, k, l, m});
}

inline StateSet gen_theorem5(int k, int l, int m)
{
    using namespace detail;
    require(k >= 2 && l >= 2 && m >= 2, "t5 requires k,l,m >= 2");
    Listing L({udim(2 * k + 1), udim(2 * l), udim(2 * m)}, "phi");
    for (int i = 1; i <= 2 * k - 1; i += 2) L.add_pair(0, i, {2 * l - 1}, {m - 1});
    for (int i = 0; i <= 2 * k - 2; i += 2) L.add_pair(0, i, {0}, {m - 1});
    for (int i = 1; i <= 2 * l - 3; i += 2) L.add_pair(1, i, {2}, {2 * m - 1});
    for (int i = 0; i <= 2 * l - 4; i += 2) L.add_pair(1, i, {2}, {0});
    L.add_pair(1, 2 * l - 2, {2}, {2 * m - 2});
    for (int i = 0; i <= 2 * m - 4; i += 2) L.add_pair(2, i, {2 * k}, {1});
    for (int i = 1; i <= 2 * m - 3; i += 2) L.add_pair(2, i, {0}, {1});
    L.add_pair(2, 2 * m - 2, {1}, {1});
    for (int i = 1; i <= 2 * k - 1; ++i) L.add({i}, {1}, {m - 1});
    for (int i = 2; i <= 2 * l - 2; ++i) L.add({2}, {i}, {m - 1});
    for (int i = 1; i <= 2 * m - 2; ++i)
        if (i != m - 1) L.add({2}, {1}, {i});
    return std::move(L).finish(Family::T5, {0, k, l, m});
}

inline StateSet gen_theorem6(int k, int l, int m)
{
    using namespace detail;
    require(k >= 3 && l >= 3 && m >= 3, "t6 requires k,l,m >= 3");
    Listing L({udim(2 * k), udim(2 * l), udim(2 * m)}, "phi");
    for (int i = 0; i <= 2 * k - 4; i += 2) L.add_pair(0, i, {2 * l - 1}, {2});
    for (int i = 1; i <= 2 * k - 5; i += 2) L.add_pair(0, i, {0}, {2});
    L.add_pair(0, 2 * k - 2, {0}, {2});
    for (int i = 0; i <= 2 * l - 4; i += 2) L.add_pair(1, i, {2}, {2 * m - 1});
    for (int i = 1; i <= 2 * l - 5; i += 2) L.add_pair(1, i, {2}, {0});
    L.add_pair(1, 2 * l - 2, {2}, {0});
    for (int i = 0; i <= 2 * m - 4; i += 2) L.add_pair(2, i, {2 * k - 1}, {2});
    for (int i = 1; i <= 2 * m - 5; i += 2) L.add_pair(2, i, {0}, {2});
    L.add_pair(2, 2 * m - 2, {0}, {2});
    L.add_pair(0, 2 * k - 3, {1}, {2});
    L.add_pair(1, 2 * l - 3, {2}, {1});
    L.add_pair(2, 2 * m - 3, {1}, {2});
    for (int i = 2; i <= 2 * m - 2; ++i) L.add({2}, {2}, {i});
    for (int i = 3; i <= 2 * k - 2; ++i) L.add({i}, {2}, {2});
    for (int i = 3; i <= 2 * l - 2; ++i) L.add({2}, {i}, {2});
    L.add({2}, {2}, {1});
    L.add({1}, {2}, {2});
    L.add({2}, {1}, {2});
    return std::move(L).finish(Family::T6, {0, k, l, m});
}

// full computational basis of C^dA x C^dB x C^dC
inline StateSet gen_product_basis(std::size_t da, std::size_t db, std::size_t dc)
{
    if (da == 0 || db == 0 || dc == 0)
        throw std::invalid_argument("product basis: zero dimension");
    StateSet set;
    set.family = Family::ProductBasis;
    set.dims = {da, db, dc};
    set.params.k = static_cast<int>(da);
    set.params.l = static_cast<int>(db);
    set.params.m = static_cast<int>(dc);
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < db; ++j)
            for (std::size_t k = 0; k < dc; ++k) {
                ProductState s;
                s.label = "e" + std::to_string(i) + std::to_string(j) + std::to_string(k);
                s.factors = {basis_ket(da, i), basis_ket(db, j), basis_ket(dc, k)};
                set.states.push_back(std::move(s));
            }
    return set;
}

inline StateSet generate(Family f, const FamilyParams& p)
{
    switch (f) {
    case Family::Example1: return gen_example1();
    case Family::Example2: return gen_example2();
    case Family::T1: return gen_theorem1(p.d);
    case Family::T2: return gen_theorem2(p.d);
    case Family::T3: return gen_theorem3(p.k, p.l, p.m);
    case Family::T4: return gen_theorem4(p.k, p.l, p.m);
    case Family::T5: return gen_theorem5(p.k, p.l, p.m);
    case Family::T6: return gen_theorem6(p.k, p.l, p.m);
    case Family::ProductBasis:
        detail::require(p.k > 0 && p.l > 0 && p.m > 0, "product basis requires positive dimensions");
        return gen_product_basis(detail::udim(p.k), detail::udim(p.l), detail::udim(p.m));
    case Family::Custom: break;
    }
    throw std::invalid_argument("cannot generate a custom family");
}

inline std::size_t expected_count(Family f, const FamilyParams& p)
{
    auto u = [](int n) { return static_cast<std::size_t>(n); };
    switch (f) {
    case Family::Example1: return 36;
    case Family::Example2: return 31;
    case Family::T1:
    case Family::T2: return 18 * (u(p.d) - 1);
    case Family::T3: return 6 * u(p.k + p.l + p.m) - 5;
    case Family::T4: return 6 * u(p.k + p.l + p.m) - 8;
    case Family::T5: return 6 * u(p.k + p.l + p.m) - 11;
    case Family::T6: return 6 * u(p.k + p.l + p.m) - 14;
    case Family::ProductBasis: return u(p.k) * u(p.l) * u(p.m);
    case Family::Custom: break;
    }
    throw std::invalid_argument("no expected count for a custom family");
}

// (x,y,z) -> (z,x,y): the factor held by A moves to B, B's to C, C's to A.
inline StateSet cyclic_shift(const StateSet& in)
{
    StateSet out = in;
    out.family = Family::Custom;
    out.dims = {in.dims[2], in.dims[0], in.dims[1]};
    for (auto& s : out.states)
        s.factors = {s.factors[2], s.factors[0], s.factors[1]};
    return out;
}

// "|x>|y>|z>" -> "|z>|x>|y>"
inline std::string cyclic_shift_key(const std::string& key)
{
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos < key.size()) {
        if (key[pos] != '|')
            throw std::invalid_argument("malformed state key '" + key + "'");
        std::size_t end = key.find('>', pos);
        if (end == std::string::npos)
            throw std::invalid_argument("malformed state key '" + key + "'");
        parts.push_back(key.substr(pos, end - pos + 1));
        pos = end + 1;
    }
    if (parts.size() != 3)
        throw std::invalid_argument("malformed state key '" + key + "'");
    return parts[2] + parts[0] + parts[1];
}

// Same states as vectors up to a global phase, ignoring order and labels.
inline bool same_states(const StateSet& a, const StateSet& b, double tol = 1e-12)
{
    if (a.dims != b.dims || a.size() != b.size())
        return false;
    std::vector<bool> used(b.size(), false);
    for (const auto& s : a.states) {
        bool found = false;
        for (std::size_t j = 0; j < b.size() && !found; ++j) {
            if (used[j])
                continue;
            if (std::abs(std::abs(overlap(s, b.states[j])) - 1.0) <= tol) {
                used[j] = true;
                found = true;
            }
        }
        if (!found)
            return false;
    }
    return true;
}

}  // namespace locc

#endif  // LOCCLAB_FAMILIES_HPP
