#pragma once

/**
 * From a labeling back to a fixed point problem.
 *
 * Every grid vertex x with label l = l(x) is moved to
 *
 *     f_j(x) = x_j - tau      for j = l,
 *     f_j(x) = x_j + tau / n  for j != l,
 *
 * and f is extended affinely over each cell.  The extension is piecewise
 * affine, and on a cell with weights lambda its displacement in coordinate i
 * is sum_j lambda_j c_j with c_j = -tau if vertex j carries label i and
 * tau / n otherwise.  A fixed point therefore needs every label on the cell
 * exactly once with all weights 1/(n+1): fixed points are exactly the
 * barycenters of fully labeled cells.  Everything here is exact.
 */

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fixsim/errors.hpp"
#include "fixsim/fixed_point.hpp"
#include "fixsim/labeling.hpp"
#include "fixsim/scalar.hpp"
#include "fixsim/simplex_core.hpp"
#include "fixsim/sperner_search.hpp"

namespace fixsim {

/** Vertex images of the perturbation map; immutable after build_vertex_map. */
struct VertexMap
{
    std::shared_ptr<const SubdivisionGrid> grid;
    Labeling labeling;
    Rational tau;
    std::vector<std::vector<Rational>> images;        // by vertex id
    std::vector<std::vector<double>> images_double;   // same, rounded

    int dimension() const { return grid->dimension(); }
    int subdivisions() const { return grid->subdivisions(); }
};

/** min over vertices of the coordinate at the vertex's label; tau must stay strictly below it. */
inline Rational tau_upper_bound(const SubdivisionGrid& grid, const Labeling& lab)
{
    int smallest = grid.subdivisions();
    for (std::size_t v = 0; v < grid.vertex_count(); ++v)
        smallest = std::min(smallest, grid.vertex(v)[lab[v]]);
    return Rational(smallest, grid.subdivisions());
}

inline void require_admissible(const SubdivisionGrid& grid, const Labeling& lab)
{
    const auto violations = check_admissible(grid, lab);
    if (violations.empty())
        return;
    std::string msg = std::to_string(violations.size()) + " labeling violation(s); first: vertex (";
    const auto& v = violations.front();
    for (std::size_t i = 0; i < v.coords.size(); ++i)
        msg += (i ? "," : "") + std::to_string(v.coords[i]);
    msg += ") labeled " + std::to_string(v.label) + ": " + v.rule;
    throw InadmissibleLabeling(msg);
}

/** Builds the vertex images; tau defaults to half the admissible bound (1/(2m)). */
inline VertexMap build_vertex_map(std::shared_ptr<const SubdivisionGrid> grid, Labeling lab,
                                  std::optional<Rational> tau = std::nullopt)
{
    require_admissible(*grid, lab);
    const Rational bound = tau_upper_bound(*grid, lab);
    const Rational t = tau.value_or(bound / 2);
    if (t <= 0)
        throw InvalidInput("tau must be positive, got " + to_fraction_string(t));
    if (t >= bound)
        throw TauTooLarge("tau = " + to_fraction_string(t) + " is not below "
                          + to_fraction_string(bound));

    const int n = grid->dimension();
    const int m = grid->subdivisions();
    VertexMap vm{grid, std::move(lab), t, {}, {}};
    vm.images.reserve(grid->vertex_count());
    vm.images_double.reserve(grid->vertex_count());
    const Rational spread = t / n;
    for (std::size_t v = 0; v < grid->vertex_count(); ++v)
    {
        const auto a = grid->vertex(v);
        std::vector<Rational> img(n + 1);
        std::vector<double> img_d(n + 1);
        for (int j = 0; j <= n; ++j)
        {
            img[j] = Rational(a[j], m) + (j == vm.labeling[v] ? Rational(-t) : spread);
            img_d[j] = to_double(img[j]);
        }
        vm.images.push_back(std::move(img));
        vm.images_double.push_back(std::move(img_d));
    }
    return vm;
}

/** Affine extension over the cell containing p. */
template <class T>
BarycentricPoint<T> eval_constructed(const VertexMap& vm, const BarycentricPoint<T>& p)
{
    const auto loc = locate_cell(*vm.grid, p);
    const int n = vm.dimension();
    std::vector<T> out(n + 1, T(0));
    const auto vs = vm.grid->cell(loc.cell);
    for (int k = 0; k <= n; ++k)
    {
        if (loc.weights[k] == 0)
            continue;
        if constexpr (is_exact_v<T>)
        {
            for (int i = 0; i <= n; ++i)
                out[i] += loc.weights[k] * vm.images[vs[k]][i];
        }
        else
        {
            for (int i = 0; i <= n; ++i)
                out[i] += loc.weights[k] * vm.images_double[vs[k]][i];
        }
    }
    return BarycentricPoint<T>(std::move(out));
}

/** The constructed map as a floating point SimplexMap. */
struct ConstructedMap
{
    std::shared_ptr<const VertexMap> vm;

    std::vector<double> operator()(std::span<const double> p) const
    {
        const auto image = eval_constructed(*vm, BarycentricPoint<double>(std::vector<double>(p.begin(), p.end())));
        return {image.begin(), image.end()};
    }

    /** Lipschitz constant 1 + (1 + 1/n) tau m used to size grids for this map. */
    double lipschitz() const
    {
        const int n = vm->dimension();
        return 1 + (1 + 1.0 / n) * to_double(vm->tau) * vm->subdivisions();
    }
};

enum class LabelOccurrence
{
    absent,
    single,
    multiple,
};

/**
 * Displacement f_i(z) - z_i on a cell as an affine function of the weights,
 * sum_j coefficients[j] * lambda_j.  For an absent label all coefficients
 * are tau/n, so the displacement is the constant tau/n.  For a label carried
 * by one vertex k it is ((1/n) sum_{j != k} lambda_j - lambda_k) tau.  Labels
 * carried by several vertices use the same formula and are flagged.
 */
struct CoordinateDisplacement
{
    int coordinate = 0;
    LabelOccurrence occurrence = LabelOccurrence::absent;
    std::vector<int> carriers;   // positions in the cell's vertex list
    std::vector<Rational> coefficients;

    Rational at(std::span<const Rational> weights) const
    {
        Rational d = 0;
        for (std::size_t j = 0; j < coefficients.size(); ++j)
            d += coefficients[j] * weights[j];
        return d;
    }

    /** Defined only for absent labels, where the displacement does not depend on the weights. */
    std::optional<Rational> constant() const
    {
        if (occurrence != LabelOccurrence::absent)
            return std::nullopt;
        return coefficients.front();
    }
};

struct CellDisplacement
{
    std::size_t cell = 0;
    std::vector<CoordinateDisplacement> coordinates;
    bool fully_labeled = false;
    bool has_multiple = false;
};

inline CellDisplacement displacement_on_cell(const VertexMap& vm, std::size_t cell)
{
    const int n = vm.dimension();
    const auto vs = vm.grid->cell(cell);
    CellDisplacement out;
    out.cell = cell;
    out.fully_labeled = is_fully_labeled(*vm.grid, cell, vm.labeling);
    const Rational spread = vm.tau / n;
    for (int i = 0; i <= n; ++i)
    {
        CoordinateDisplacement cd;
        cd.coordinate = i;
        for (int j = 0; j <= n; ++j)
        {
            const bool carries = vm.labeling[vs[j]] == i;
            if (carries)
                cd.carriers.push_back(j);
            cd.coefficients.push_back(carries ? Rational(-vm.tau) : spread);
        }
        cd.occurrence = cd.carriers.empty()      ? LabelOccurrence::absent
                        : cd.carriers.size() == 1 ? LabelOccurrence::single
                                                  : LabelOccurrence::multiple;
        out.has_multiple = out.has_multiple || cd.occurrence == LabelOccurrence::multiple;
        out.coordinates.push_back(std::move(cd));
    }
    return out;
}

struct ExactFixedPoint
{
    BarycentricPoint<Rational> point;
    std::size_t cell;
};

/** Barycenter of a fully labeled cell, verified to satisfy f(z) = z exactly. */
inline ExactFixedPoint fixed_point_of_construction(const VertexMap& vm,
                                                   SearchStrategy strategy = SearchStrategy::exhaustive)
{
    std::size_t cell;
    try
    {
        cell = find_fully_labeled(*vm.grid, vm.labeling, strategy);
    }
    catch (const SearchExhausted& e)
    {
        throw NoFixedPointFound(std::string("no fully labeled cell: ") + e.what());
    }
    auto z = vm.grid->cell_barycenter<Rational>(cell);
    if (eval_constructed(vm, z) != z)
        throw NoFixedPointFound("barycenter of cell " + std::to_string(cell) + " is not fixed");
    return {std::move(z), cell};
}

struct RoundTripReport
{
    Rational tau;
    ExactFixedPoint exact;
    FixedPointResult floating;
    std::size_t floating_cell = 0;   // fully labeled cell the floating point result was attributed to
    double distance_to_barycenter = 0;
    bool same_cell = false;
    bool floating_barycenter_exact = false;
};

/**
 * Solves the constructed map twice: exactly, through the barycenter of a
 * fully labeled cell, and with the floating point refinement loop.  The
 * floating result must lie within one lattice step of a fully labeled cell
 * whose barycenter is again an exact fixed point.
 */
inline RoundTripReport roundtrip_check(std::shared_ptr<const SubdivisionGrid> grid, const Labeling& lab,
                                       std::optional<Rational> tau = std::nullopt, double tol = 1e-6,
                                       const RefineOptions& opt = {})
{
    auto vm = std::make_shared<const VertexMap>(build_vertex_map(grid, lab, tau));
    RoundTripReport rep;
    rep.tau = vm->tau;
    rep.exact = fixed_point_of_construction(*vm);

    const ConstructedMap f{vm};
    const int n = grid->dimension();
    const int m = grid->subdivisions();
    rep.floating = refine_fixed_point(f, n, tol, ModulusOfContinuity::lipschitz(f.lipschitz()), opt);
    if (rep.floating.status != FixedPointStatus::converged)
        throw RoundTripMismatch("floating point solver reported a non-contraction witness");
    if (rep.floating.residual > tol)
        throw RoundTripMismatch("floating point residual " + std::to_string(rep.floating.residual)
                                + " exceeds " + std::to_string(tol));

    // Cells within one lattice step: every vertex within 1/m of the point.
    const auto& x = rep.floating.point;
    const auto home = locate_cell(*grid, x);
    std::vector<std::uint32_t> candidates;
    for (std::uint32_t v : grid->cell(home.cell))
        for (std::uint32_t c : grid->cells_incident_to(v))
            candidates.push_back(c);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::optional<std::size_t> best;
    double best_dist = 0;
    for (std::uint32_t c : candidates)
    {
        if (!is_fully_labeled(*grid, c, vm->labeling))
            continue;
        bool near = true;
        for (std::uint32_t v : grid->cell(c))
            near = near && max_norm_distance<double>(lattice_point(grid->vertex(v), m), x.coords())
                               <= 1.0 / m + 1e-9;
        if (!near)
            continue;
        const auto b = grid->cell_barycenter<double>(c);
        const double d = max_norm_distance<double>(b.coords(), x.coords());
        if (!best || d < best_dist)
        {
            best = c;
            best_dist = d;
        }
    }
    if (!best)
        throw RoundTripMismatch("no fully labeled cell within one lattice step of the floating point result");
    rep.floating_cell = *best;
    rep.distance_to_barycenter = best_dist;
    rep.same_cell = *best == rep.exact.cell;
    const auto zb = grid->cell_barycenter<Rational>(*best);
    rep.floating_barycenter_exact = eval_constructed(*vm, zb) == zb;
    if (!rep.floating_barycenter_exact)
        throw RoundTripMismatch("barycenter of the floating point cell is not an exact fixed point");
    return rep;
}

}   // namespace fixsim
