#pragma once

/**
 * Points of the standard n-simplex, its m-fold equal subdivision and point
 * location.
 *
 * Lattice vertices are tuples of n+1 nonnegative integers summing to m; the
 * embedded point is the tuple divided by m.  Cells come from the staircase
 * (Kuhn/Freudenthal) triangulation expressed in cumulative coordinates
 *
 *     y_j = a_j + a_{j+1} + ... + a_n,    j = 1, ..., n,
 *
 * in which the simplex is the region m >= y_1 >= y_2 >= ... >= y_n >= 0.  A
 * cell is a base point of Z^n together with the order in which its axes are
 * incremented, so the subdivision is well defined for every n and has exactly
 * m^n cells.
 */

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fixsim/errors.hpp"
#include "fixsim/scalar.hpp"

namespace fixsim {

// ---------------------------------------------------------------------------
// Points
// ---------------------------------------------------------------------------

template <class T>
class BarycentricPoint
{
    public:
        BarycentricPoint() = default;

        /** Wraps coordinates the caller knows to be on the simplex; make_point validates. */
        explicit BarycentricPoint(std::vector<T> coords) : coords_(std::move(coords)) {}

        int dimension() const { return static_cast<int>(coords_.size()) - 1; }
        std::size_t size() const { return coords_.size(); }
        const T& operator[](std::size_t i) const { return coords_[i]; }
        std::span<const T> coords() const { return coords_; }
        auto begin() const { return coords_.begin(); }
        auto end() const { return coords_.end(); }

        bool operator==(const BarycentricPoint&) const = default;

    private:
        std::vector<T> coords_;
};

/**
 * Validates a coordinate sequence for the n-simplex.  Floating point input is
 * clamped at zero and renormalized; exact input must already be on the simplex.
 */
template <class T>
BarycentricPoint<T> make_point(int n, std::span<const T> coords)
{
    if (n < 0 || coords.size() != static_cast<std::size_t>(n) + 1)
        throw WrongArity("expected " + std::to_string(n + 1) + " coordinates, got "
                         + std::to_string(coords.size()));
    if constexpr (is_exact_v<T>)
    {
        T sum = 0;
        for (const T& c : coords)
        {
            if (c < 0)
                throw NotOnSimplex("negative coordinate " + c.str());
            sum += c;
        }
        if (sum != 1)
            throw NotOnSimplex("coordinates sum to " + sum.str() + ", not 1");
        return BarycentricPoint<T>(std::vector<T>(coords.begin(), coords.end()));
    }
    else
    {
        T sum = 0;
        std::vector<T> out(coords.begin(), coords.end());
        for (T& c : out)
        {
            if (!std::isfinite(c) || c < -1e-9)
                throw NotOnSimplex("coordinate " + std::to_string(c) + " is not >= 0");
            c = std::max(c, T(0));
            sum += c;
        }
        if (std::abs(sum - 1) > 1e-9)
            throw NotOnSimplex("coordinates sum to " + std::to_string(sum) + ", not 1");
        for (T& c : out)
            c /= sum;
        return BarycentricPoint<T>(std::move(out));
    }
}

template <class T>
BarycentricPoint<T> make_point(int n, std::initializer_list<T> coords)
{
    return make_point<T>(n, std::span<const T>(coords.begin(), coords.size()));
}

template <class T>
T max_norm_distance(std::span<const T> a, std::span<const T> b)
{
    T best = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        T d = a[i] - b[i];
        if (d < 0)
            d = -d;
        if (d > best)
            best = d;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Lattice arithmetic
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

/** Binomial coefficient, saturating at kSaturated. */
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i)
    {
        r = r * (n - k + i) / i;
        if (r > kSaturated)
            return kSaturated;
    }
    return static_cast<std::uint64_t>(r);
}

/** m^n, saturating at kSaturated. */
inline std::uint64_t cell_count(int n, int m)
{
    unsigned __int128 r = 1;
    for (int i = 0; i < n; ++i)
    {
        r *= static_cast<unsigned>(m);
        if (r > kSaturated)
            return kSaturated;
    }
    return static_cast<std::uint64_t>(r);
}

inline std::uint64_t lattice_vertex_count(int n, int m)
{
    return binomial(static_cast<std::uint64_t>(m) + n, static_cast<std::uint64_t>(n));
}

/** Position of a lattice tuple in the lexicographic order of all tuples with the same sum. */
inline std::uint64_t vertex_rank(std::span<const int> coords, int m)
{
    const int n = static_cast<int>(coords.size()) - 1;
    std::uint64_t rank = 0;
    int remaining = m;
    for (int j = 0; j < n; ++j)
    {
        const int tail = n - j;   // free positions after j
        for (int v = 0; v < coords[j]; ++v)
            rank += binomial(static_cast<std::uint64_t>(remaining - v + tail - 1),
                             static_cast<std::uint64_t>(tail - 1));
        remaining -= coords[j];
    }
    return rank;
}

/** Default cell budget, overridable through FIXSIM_CELL_BUDGET. */
inline std::uint64_t default_cell_budget()
{
    if (const char* env = std::getenv("FIXSIM_CELL_BUDGET"))
    {
        // Accepts 10000000 as well as 1e7.
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env && *end == '\0' && v >= 1 && v < 1.8e19)
            return static_cast<std::uint64_t>(v);
    }
    return 10'000'000ULL;
}

// ---------------------------------------------------------------------------
// Staircase cells (implicit, never materialized)
// ---------------------------------------------------------------------------

/**
 * A cell of the staircase triangulation of the face spanned by corners
 * 0..d, d = base.size().  Vertex i has cumulative coordinates
 * base + e_{axes[0]} + ... + e_{axes[i-1]}.
 */
struct KuhnCell
{
    std::vector<int> base;
    std::vector<int> axes;

    int dimension() const { return static_cast<int>(base.size()); }

    std::vector<int> cumulative_vertex(int i) const
    {
        std::vector<int> y = base;
        for (int j = 0; j < i; ++j)
            ++y[axes[j]];
        return y;
    }

    bool operator==(const KuhnCell&) const = default;
};

/** Lattice tuple (length n+1) of a point given in cumulative coordinates of a d-face. */
inline std::vector<int> cumulative_to_lattice(std::span<const int> y, int n, int m)
{
    const int d = static_cast<int>(y.size());
    std::vector<int> a(n + 1, 0);
    if (d == 0)
    {
        a[0] = m;
        return a;
    }
    a[0] = m - y[0];
    for (int j = 1; j < d; ++j)
        a[j] = y[j - 1] - y[j];
    a[d] = y[d - 1];
    return a;
}

inline bool cumulative_in_simplex(std::span<const int> y, int m)
{
    if (y.empty())
        return true;
    if (y.front() > m || y.back() < 0)
        return false;
    for (std::size_t j = 0; j + 1 < y.size(); ++j)
        if (y[j] < y[j + 1])
            return false;
    return true;
}

inline bool kuhn_cell_valid(const KuhnCell& cell, int m)
{
    std::vector<int> y = cell.base;
    if (!cumulative_in_simplex(y, m))
        return false;
    for (int axis : cell.axes)
    {
        ++y[axis];
        if (!cumulative_in_simplex(y, m))
            return false;
    }
    return true;
}

/** Lattice tuples of the d+1 vertices, in staircase order. */
inline std::vector<std::vector<int>> kuhn_vertices(const KuhnCell& cell, int n, int m)
{
    std::vector<std::vector<int>> out;
    out.reserve(cell.base.size() + 1);
    std::vector<int> y = cell.base;
    out.push_back(cumulative_to_lattice(y, n, m));
    for (int axis : cell.axes)
    {
        ++y[axis];
        out.push_back(cumulative_to_lattice(y, n, m));
    }
    return out;
}

struct KuhnPivot
{
    KuhnCell cell;
    int new_vertex;   // index of the vertex that replaced the dropped one
};

/**
 * Neighbouring cell across the facet opposite vertex `drop`, or nullopt when
 * that facet lies on the boundary of the face.
 */
inline std::optional<KuhnPivot> kuhn_pivot(const KuhnCell& cell, int drop, int m)
{
    const int d = cell.dimension();
    KuhnPivot out{cell, drop};
    if (drop == 0)
    {
        ++out.cell.base[cell.axes[0]];
        std::rotate(out.cell.axes.begin(), out.cell.axes.begin() + 1, out.cell.axes.end());
        out.new_vertex = d;
    }
    else if (drop == d)
    {
        --out.cell.base[cell.axes[d - 1]];
        std::rotate(out.cell.axes.rbegin(), out.cell.axes.rbegin() + 1, out.cell.axes.rend());
        out.new_vertex = 0;
    }
    else
    {
        std::swap(out.cell.axes[drop - 1], out.cell.axes[drop]);
    }
    if (!kuhn_cell_valid(out.cell, m))
        return std::nullopt;
    return out;
}

template <class T>
struct KuhnLocation
{
    KuhnCell cell;
    std::vector<T> weights;   // staircase vertex order
};

/**
 * Staircase cell of the m-fold subdivision containing p, with barycentric
 * weights.  Integer parts of the scaled cumulative coordinates give the base,
 * the decreasing order of fractional parts (ties by axis) gives the axes.
 */
template <class T>
KuhnLocation<T> locate_kuhn_cell(int m, std::span<const T> p)
{
    const int n = static_cast<int>(p.size()) - 1;
    std::vector<T> y(n);
    T tail = 0;
    for (int j = n; j >= 1; --j)
    {
        tail += p[j];
        T v = tail * m;
        if constexpr (!is_exact_v<T>)
            v = std::clamp(v, T(0), T(m));
        y[j - 1] = v;
    }
    KuhnLocation<T> loc;
    loc.cell.base.resize(n);
    std::vector<T> frac(n);
    for (int j = 0; j < n; ++j)
    {
        const auto c = std::min<std::int64_t>(floor_to_int(y[j]), m - 1);
        loc.cell.base[j] = static_cast<int>(c);
        frac[j] = y[j] - T(static_cast<long>(c));
    }
    loc.cell.axes.resize(n);
    std::iota(loc.cell.axes.begin(), loc.cell.axes.end(), 0);
    std::stable_sort(loc.cell.axes.begin(), loc.cell.axes.end(),
                     [&](int a, int b) { return frac[a] > frac[b]; });
    loc.weights.resize(n + 1);
    if (n == 0)
    {
        loc.weights[0] = 1;
        return loc;
    }
    loc.weights[0] = T(1) - frac[loc.cell.axes[0]];
    for (int k = 1; k < n; ++k)
        loc.weights[k] = frac[loc.cell.axes[k - 1]] - frac[loc.cell.axes[k]];
    loc.weights[n] = frac[loc.cell.axes[n - 1]];
    return loc;
}

// ---------------------------------------------------------------------------
// Materialized grid
// ---------------------------------------------------------------------------

/**
 * The m-fold equal subdivision of the n-simplex with every vertex and cell
 * stored.  Vertex ids are lexicographic ranks of the lattice tuples; each
 * cell lists its vertex ids in increasing order (equivalently, vertices
 * sorted lexicographically) and cells are sorted by that list.  Immutable
 * after construction.
 */
class SubdivisionGrid
{
    public:
        SubdivisionGrid(int n, int m, std::uint64_t cell_budget = default_cell_budget())
            : n_(n), m_(m)
        {
            if (n < 1)
                throw InvalidInput("dimension must be >= 1");
            if (m < 1)
                throw InvalidInput("subdivision count must be >= 1");
            const std::uint64_t cells = fixsim::cell_count(n, m);
            if (cells > cell_budget)
                throw ResourceLimit(std::to_string(m) + "^" + std::to_string(n)
                                    + " cells exceed the budget of "
                                    + std::to_string(cell_budget));
            const std::uint64_t verts = lattice_vertex_count(n, m);
            if (verts >= std::numeric_limits<std::uint32_t>::max())
                throw ResourceLimit("too many lattice vertices");
            build_vertices(verts);
            build_cells(cells);
            build_incidence();
        }

        int dimension() const { return n_; }
        int subdivisions() const { return m_; }
        std::size_t vertex_count() const { return coords_.size() / (n_ + 1); }
        std::size_t cell_count() const { return cells_.size() / (n_ + 1); }

        /** Lattice tuple (sums to m). */
        std::span<const int> vertex(std::size_t id) const
        {
            return {coords_.data() + id * (n_ + 1), static_cast<std::size_t>(n_ + 1)};
        }

        /** Vertex ids of a cell, increasing. */
        std::span<const std::uint32_t> cell(std::size_t id) const
        {
            return {cells_.data() + id * (n_ + 1), static_cast<std::size_t>(n_ + 1)};
        }

        std::span<const std::uint32_t> cells_incident_to(std::size_t vertex) const
        {
            return {incident_.data() + incident_offsets_[vertex],
                    incident_offsets_[vertex + 1] - incident_offsets_[vertex]};
        }

        std::size_t vertex_id(std::span<const int> coords) const
        {
            return static_cast<std::size_t>(vertex_rank(coords, m_));
        }

        template <class T>
        BarycentricPoint<T> vertex_point(std::size_t id) const
        {
            std::vector<T> p(n_ + 1);
            const auto v = vertex(id);
            for (int i = 0; i <= n_; ++i)
                p[i] = ratio<T>(v[i], m_);
            return BarycentricPoint<T>(std::move(p));
        }

        template <class T>
        BarycentricPoint<T> cell_barycenter(std::size_t id) const
        {
            std::vector<T> p(n_ + 1, T(0));
            for (std::uint32_t v : cell(id))
                for (int i = 0; i <= n_; ++i)
                    p[i] += ratio<T>(vertex(v)[i], static_cast<std::int64_t>(m_) * (n_ + 1));
            return BarycentricPoint<T>(std::move(p));
        }

        /** Id of the cell with exactly these vertices (any order). */
        std::optional<std::size_t> find_cell(std::span<const std::uint32_t> vertex_ids) const
        {
            std::vector<std::uint32_t> key(vertex_ids.begin(), vertex_ids.end());
            std::sort(key.begin(), key.end());
            for (std::uint32_t c : cells_incident_to(key.front()))
            {
                const auto vs = cell(c);
                if (std::equal(vs.begin(), vs.end(), key.begin(), key.end()))
                    return c;
            }
            return std::nullopt;
        }

        std::optional<std::size_t> find_cell(const KuhnCell& kc) const
        {
            std::vector<std::uint32_t> ids;
            for (const auto& v : kuhn_vertices(kc, n_, m_))
                ids.push_back(static_cast<std::uint32_t>(vertex_id(v)));
            return find_cell(ids);
        }

        /** Cells split into `parts` contiguous index ranges for parallel scans. */
        std::vector<std::pair<std::size_t, std::size_t>> cell_ranges(std::size_t parts) const
        {
            parts = std::max<std::size_t>(1, parts);
            const std::size_t total = cell_count();
            std::vector<std::pair<std::size_t, std::size_t>> out;
            for (std::size_t p = 0; p < parts; ++p)
                out.emplace_back(total * p / parts, total * (p + 1) / parts);
            return out;
        }

    private:
        void build_vertices(std::uint64_t count)
        {
            coords_.reserve(count * (n_ + 1));
            std::vector<int> a(n_ + 1, 0);
            emit_vertices(a, 0, m_);
        }

        void emit_vertices(std::vector<int>& a, int pos, int remaining)
        {
            if (pos == n_)
            {
                a[pos] = remaining;
                coords_.insert(coords_.end(), a.begin(), a.end());
                return;
            }
            for (int v = 0; v <= remaining; ++v)
            {
                a[pos] = v;
                emit_vertices(a, pos + 1, remaining - v);
            }
        }

        void build_cells(std::uint64_t count)
        {
            cells_.reserve(count * (n_ + 1));
            KuhnCell kc;
            kc.base.assign(n_, 0);
            kc.axes.resize(n_);
            emit_bases(kc, 0);
            sort_cells();
        }

        void emit_bases(KuhnCell& kc, int pos)
        {
            if (pos == n_)
            {
                std::iota(kc.axes.begin(), kc.axes.end(), 0);
                do
                {
                    if (!kuhn_cell_valid(kc, m_))
                        continue;
                    for (const auto& v : kuhn_vertices(kc, n_, m_))
                        cells_.push_back(static_cast<std::uint32_t>(vertex_id(v)));
                    std::sort(cells_.end() - (n_ + 1), cells_.end());
                } while (std::next_permutation(kc.axes.begin(), kc.axes.end()));
                return;
            }
            const int upper = pos == 0 ? m_ - 1 : kc.base[pos - 1];
            for (int v = 0; v <= upper; ++v)
            {
                kc.base[pos] = v;
                emit_bases(kc, pos + 1);
            }
        }

        void sort_cells()
        {
            const std::size_t w = n_ + 1;
            const std::size_t count = cells_.size() / w;
            std::vector<std::size_t> order(count);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return std::lexicographical_compare(cells_.begin() + a * w, cells_.begin() + (a + 1) * w,
                                                    cells_.begin() + b * w, cells_.begin() + (b + 1) * w);
            });
            std::vector<std::uint32_t> sorted;
            sorted.reserve(cells_.size());
            for (std::size_t c : order)
                sorted.insert(sorted.end(), cells_.begin() + c * w, cells_.begin() + (c + 1) * w);
            cells_ = std::move(sorted);
        }

        void build_incidence()
        {
            const std::size_t nv = vertex_count();
            incident_offsets_.assign(nv + 1, 0);
            for (std::uint32_t v : cells_)
                ++incident_offsets_[v + 1];
            for (std::size_t i = 0; i < nv; ++i)
                incident_offsets_[i + 1] += incident_offsets_[i];
            incident_.resize(cells_.size());
            std::vector<std::size_t> fill(incident_offsets_.begin(), incident_offsets_.end() - 1);
            for (std::size_t c = 0; c < cell_count(); ++c)
                for (std::uint32_t v : cell(c))
                    incident_[fill[v]++] = static_cast<std::uint32_t>(c);
        }

        int n_;
        int m_;
        std::vector<int> coords_;
        std::vector<std::uint32_t> cells_;
        std::vector<std::size_t> incident_offsets_;
        std::vector<std::uint32_t> incident_;
};

inline SubdivisionGrid subdivide(int n, int m, std::uint64_t cell_budget = default_cell_budget())
{
    return SubdivisionGrid(n, m, cell_budget);
}

template <class T>
struct CellLocation
{
    std::size_t cell;
    std::vector<T> weights;   // aligned with grid.cell(cell)
};

/**
 * Cell containing p and the weights reproducing p from its vertices.  Points
 * on shared faces go to the smallest cell id among all cells containing them.
 */
template <class T>
CellLocation<T> locate_cell(const SubdivisionGrid& grid, const BarycentricPoint<T>& p)
{
    const int n = grid.dimension();
    if (p.dimension() != n)
        throw WrongArity("point dimension " + std::to_string(p.dimension())
                         + " does not match grid dimension " + std::to_string(n));
    const KuhnLocation<T> loc = locate_kuhn_cell<T>(grid.subdivisions(), p.coords());
    const auto verts = kuhn_vertices(loc.cell, n, grid.subdivisions());

    std::vector<std::uint32_t> support;
    std::vector<T> support_weights;
    for (int i = 0; i <= n; ++i)
    {
        if (loc.weights[i] > 0)
        {
            support.push_back(static_cast<std::uint32_t>(grid.vertex_id(verts[i])));
            support_weights.push_back(loc.weights[i]);
        }
    }

    // Every cell containing p has the minimal face spanned by `support`.
    std::optional<std::size_t> best;
    for (std::uint32_t c : grid.cells_incident_to(support.front()))
    {
        if (best && c >= *best)
            continue;
        const auto vs = grid.cell(c);
        const bool contains = std::all_of(support.begin(), support.end(), [&](std::uint32_t v) {
            return std::binary_search(vs.begin(), vs.end(), v);
        });
        if (contains)
            best = c;
    }

    CellLocation<T> out{*best, std::vector<T>(n + 1, T(0))};
    const auto vs = grid.cell(*best);
    for (std::size_t s = 0; s < support.size(); ++s)
    {
        const auto it = std::lower_bound(vs.begin(), vs.end(), support[s]);
        out.weights[it - vs.begin()] = support_weights[s];
    }
    return out;
}

/** Largest max-norm distance between two vertices of one cell (1/m for this subdivision). */
template <class T>
T cell_diameter(const SubdivisionGrid& grid)
{
    const int n = grid.dimension();
    int widest = 0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c)
    {
        const auto vs = grid.cell(c);
        for (int a = 0; a <= n; ++a)
            for (int b = a + 1; b <= n; ++b)
                for (int i = 0; i <= n; ++i)
                    widest = std::max(widest, std::abs(grid.vertex(vs[a])[i] - grid.vertex(vs[b])[i]));
    }
    return ratio<T>(widest, grid.subdivisions());
}

}   // namespace fixsim
