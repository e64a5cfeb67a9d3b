#ifndef LOCCLAB_RENDER_HPP
#define LOCCLAB_RENDER_HPP

#include "locclab/families.hpp"

#include <array>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace locc {

inline constexpr std::size_t kMaxRenderDim = 16;

enum class CellClass { Filled, Outlined, Plain };

inline const char* class_name(CellClass c)
{
    switch (c) {
    case CellClass::Filled: return "filled";
    case CellClass::Outlined: return "outlined";
    case CellClass::Plain: return "plain";
    }
    return "plain";
}

struct FigureCell {
    std::size_t a = 0, b = 0, c = 0;
    std::size_t state = 0;  // index into the set
    CellClass cls = CellClass::Plain;
};

// A state covers every (a,b,c) in the product of its factor supports.
// Single |i+i+1> states are filled, states whose +- partner is also in the
// set are outlined, basis states are plain.
struct FigureSpec {
    std::array<std::size_t, 3> dims{};
    std::vector<FigureCell> cells;
    std::vector<std::string> labels;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::size_t> support(const Ket& k)
{
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < k.dim(); ++i)
        if (std::abs(k[i]) > 1e-12)
            s.push_back(i);
    return s;
}

// the key of the state with the sign of its superposed factor flipped
inline std::string partner_key(const ProductState& s)
{
    std::string key;
    for (const auto& f : s.factors) {
        FactorShape sh = classify_factor(f);
        std::string n = factor_notation(f);
        if (sh.kind == FactorShape::Kind::PlusMinus) {
            auto pos = n.find(sh.sign == Sign::Plus ? '+' : '-');
            n[pos] = sh.sign == Sign::Plus ? '-' : '+';
        }
        key += "|" + n + ">";
    }
    return key;
}

}  // namespace detail

inline FigureSpec figure_spec(const StateSet& set)
{
    for (std::size_t p = 0; p < 3; ++p)
        if (set.dims[p] == 0 || set.dims[p] > kMaxRenderDim)
            throw std::invalid_argument("render: local dimension " + std::to_string(set.dims[p]) +
                                        " outside 1.." + std::to_string(kMaxRenderDim));
    FigureSpec fs;
    fs.dims = set.dims;
    if (set.empty())
        fs.warnings.push_back("empty state set: rendering a blank grid");

    std::set<std::string> keys;
    for (const auto& s : set.states)
        keys.insert(s.key());

    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& s = set.states[i];
        fs.labels.push_back(s.label);
        bool superposed = false, basis = true;
        for (const auto& f : s.factors) {
            auto k = classify_factor(f).kind;
            superposed |= k == FactorShape::Kind::PlusMinus;
            basis &= k == FactorShape::Kind::Basis;
        }
        CellClass cls = CellClass::Plain;
        if (superposed)
            cls = keys.count(detail::partner_key(s)) ? CellClass::Outlined : CellClass::Filled;
        else if (!basis)
            fs.warnings.push_back("state " + s.label + " is not a basis or +- state; drawn as plain cells");
        for (std::size_t a : detail::support(s.factors[0]))
            for (std::size_t b : detail::support(s.factors[1]))
                for (std::size_t c : detail::support(s.factors[2]))
                    fs.cells.push_back({a, b, c, i, cls});
    }
    return fs;
}

// dC panels side by side, each a dA x dB grid with A along x and B along y.
inline std::string render_svg(const FigureSpec& fs)
{
    const std::size_t cell = 20, gap = 24, margin = 20, title = 18;
    const std::size_t dA = fs.dims[0], dB = fs.dims[1], dC = fs.dims[2];
    const std::size_t pw = dA * cell, ph = dB * cell;
    const std::size_t width = 2 * margin + dC * pw + (dC ? dC - 1 : 0) * gap;
    const std::size_t height = 2 * margin + title + ph;
    auto panel_x = [&](std::size_t c) { return margin + c * (pw + gap); };
    const std::size_t top = margin + title;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\" data-dims=\"" << dA << 'x' << dB << 'x' << dC
       << "\" data-cell-count=\"" << fs.cells.size() << "\">\n";
    os << "<style>\n"
          "  .grid { fill: none; stroke: #bbb; stroke-width: 1; }\n"
          "  .cell.filled { fill: #222; stroke: #222; }\n"
          "  .cell.outlined { fill: none; stroke: #222; stroke-width: 2; }\n"
          "  .cell.plain { fill: #fff; stroke: #222; stroke-width: 1; }\n"
          "  text { font: 11px sans-serif; }\n"
          "</style>\n";
    for (std::size_t c = 0; c < dC; ++c) {
        const std::size_t x0 = panel_x(c);
        os << "<g class=\"slice\" data-c=\"" << c << "\">\n";
        os << "  <text x=\"" << x0 << "\" y=\"" << margin + 12 << "\">C=" << c << "</text>\n";
        os << "  <path class=\"grid\" d=\"";
        for (std::size_t i = 0; i <= dA; ++i)
            os << 'M' << x0 + i * cell << ' ' << top << 'v' << ph;
        for (std::size_t j = 0; j <= dB; ++j)
            os << 'M' << x0 << ' ' << top + j * cell << 'h' << pw;
        os << "\"/>\n";
        for (const auto& fc : fs.cells) {
            if (fc.c != c)
                continue;
            os << "  <rect class=\"cell " << class_name(fc.cls) << "\" x=\"" << x0 + fc.a * cell + 2 << "\" y=\""
               << top + fc.b * cell + 2 << "\" width=\"" << cell - 4 << "\" height=\"" << cell - 4
               << "\" data-state=\"" << fs.labels[fc.state] << "\"/>\n";
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

// One block per C level; rows are B levels, columns A levels.
// '#' filled, 'o' outlined, '.' plain, '-' empty.
inline std::string render_ascii(const FigureSpec& fs)
{
    const std::size_t dA = fs.dims[0], dB = fs.dims[1], dC = fs.dims[2];
    std::vector<char> grid(dA * dB * dC, '-');
    auto rank = [](char g) { return g == '#' ? 3 : g == 'o' ? 2 : g == '.' ? 1 : 0; };
    for (const auto& fc : fs.cells) {
        char g = fc.cls == CellClass::Filled ? '#' : fc.cls == CellClass::Outlined ? 'o' : '.';
        char& slot = grid[(fc.c * dB + fc.b) * dA + fc.a];
        if (rank(g) > rank(slot))
            slot = g;
    }
    std::ostringstream os;
    for (std::size_t c = 0; c < dC; ++c) {
        os << "C=" << c << '\n';
        for (std::size_t b = 0; b < dB; ++b) {
            for (std::size_t a = 0; a < dA; ++a)
                os << grid[(c * dB + b) * dA + a];
            os << '\n';
        }
        if (c + 1 < dC)
            os << '\n';
    }
    return os.str();
}

}  // namespace locc

#endif  // LOCCLAB_RENDER_HPP
