#pragma once

#include <cstdio>
#include <optional>
#include <string>

#include "fixsim/errors.hpp"
#include "fixsim/labeling.hpp"
#include "fixsim/simplex_core.hpp"

namespace fixsim {

namespace detail {

// Corner e0 bottom left, e1 bottom right, e2 on top.
inline std::pair<double, double> svg_xy(std::span<const int> a, int m)
{
    const double x = (1000.0 * a[1] + 500.0 * a[2]) / m;
    const double y = 866.0 - 866.0 * a[2] / m;
    return {x, y};
}

inline std::string svg_num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}   // namespace detail

/**
 * Equilateral picture of a 2-dimensional grid, 1000 x 866 user units.
 * With a labeling the vertex labels are drawn and fully labeled cells shaded.
 */
inline std::string render_svg(const SubdivisionGrid& grid, const Labeling* lab = nullptr)
{
    if (grid.dimension() != 2)
        throw UnsupportedDimension("rendering needs n = 2, got n = " + std::to_string(grid.dimension()));
    const int m = grid.subdivisions();

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"866\" "
                    "viewBox=\"-40 -40 1080 946\">\n";
    s += "<g stroke=\"#222\" stroke-width=\"1.5\" stroke-linejoin=\"round\">\n";
    for (std::size_t c = 0; c < grid.cell_count(); ++c)
    {
        const bool full = lab && is_fully_labeled(grid, c, *lab);
        s += "<polygon class=\"cell";
        s += full ? " full\" fill=\"#f2b134\"" : "\" fill=\"#ffffff\"";
        s += " points=\"";
        bool first = true;
        for (std::uint32_t v : grid.cell(c))
        {
            const auto [x, y] = detail::svg_xy(grid.vertex(v), m);
            s += (first ? "" : " ") + detail::svg_num(x) + "," + detail::svg_num(y);
            first = false;
        }
        s += "\"/>\n";
    }
    s += "</g>\n";
    if (lab)
    {
        s += "<g font-family=\"sans-serif\" font-size=\"22\" text-anchor=\"middle\">\n";
        for (std::size_t v = 0; v < grid.vertex_count(); ++v)
        {
            const auto [x, y] = detail::svg_xy(grid.vertex(v), m);
            s += "<circle cx=\"" + detail::svg_num(x) + "\" cy=\"" + detail::svg_num(y) + "\" r=\"4\"/>";
            s += "<text class=\"label\" x=\"" + detail::svg_num(x) + "\" y=\"" + detail::svg_num(y - 10) + "\">"
                 + std::to_string((*lab)[v]) + "</text>\n";
        }
        s += "</g>\n";
    }
    s += "</svg>\n";
    return s;
}

}   // namespace fixsim
