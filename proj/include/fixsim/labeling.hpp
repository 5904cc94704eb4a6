#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <exception>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "fixsim/errors.hpp"
#include "fixsim/simplex_core.hpp"

namespace fixsim {

/** Anything that maps a point of the simplex (as n+1 doubles) to n+1 doubles. */
template <class F>
concept SimplexMap = requires(const F& f, std::span<const double> p) {
    { f(p) } -> std::convertible_to<std::vector<double>>;
};

/** Evaluates f at p and checks that the image is a point of the simplex. */
template <SimplexMap F>
std::vector<double> checked_image(const F& f, std::span<const double> p)
{
    std::vector<double> image = f(p);
    if (image.size() != p.size())
        throw MapRangeError("map returned " + std::to_string(image.size()) + " components, expected "
                            + std::to_string(p.size()));
    double sum = 0;
    for (double c : image)
    {
        if (!std::isfinite(c) || c < -1e-9)
            throw MapRangeError("map component " + std::to_string(c) + " is outside [0, 1]");
        sum += c;
    }
    if (std::abs(sum - 1) > 1e-9)
        throw MapRangeError("map components sum to " + std::to_string(sum));
    return image;
}

/**
 * Standard Sperner label of a lattice vertex: the smallest index i with
 * a_i > 0 and f_i(v) <= v_i.  Such an index exists in exact arithmetic since
 * both f(v) and v sum to one; if rounding hides it, the carrier index with
 * the smallest f_i(v) - v_i is used.
 */
inline int standard_label(std::span<const int> coords, int m, std::span<const double> image)
{
    int fallback = -1;
    double fallback_gap = 0;
    for (std::size_t i = 0; i < coords.size(); ++i)
    {
        if (coords[i] <= 0)
            continue;
        const double vi = static_cast<double>(coords[i]) / m;
        if (image[i] <= vi)
            return static_cast<int>(i);
        const double gap = image[i] - vi;
        if (fallback < 0 || gap < fallback_gap)
        {
            fallback = static_cast<int>(i);
            fallback_gap = gap;
        }
    }
    return fallback;
}

/** Point of the simplex embedded from a lattice tuple. */
inline std::vector<double> lattice_point(std::span<const int> coords, int m)
{
    std::vector<double> p(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i)
        p[i] = static_cast<double>(coords[i]) / m;
    return p;
}

/** Vertex labels of an m-fold subdivision, indexed by vertex id (lexicographic rank). */
class Labeling
{
    public:
        Labeling(int n, int m, std::vector<int> labels) : n_(n), m_(m), labels_(std::move(labels))
        {
            if (labels_.size() != lattice_vertex_count(n, m))
                throw InvalidInput("labeling has " + std::to_string(labels_.size())
                                   + " entries, grid has "
                                   + std::to_string(lattice_vertex_count(n, m)) + " vertices");
        }

        int dimension() const { return n_; }
        int subdivisions() const { return m_; }
        std::size_t size() const { return labels_.size(); }
        int operator[](std::size_t vertex_id) const { return labels_[vertex_id]; }
        int label_of(std::span<const int> coords) const
        {
            return labels_[static_cast<std::size_t>(vertex_rank(coords, m_))];
        }
        std::span<const int> labels() const { return labels_; }

        bool operator==(const Labeling&) const = default;

    private:
        int n_;
        int m_;
        std::vector<int> labels_;
};

struct Violation
{
    std::size_t vertex;
    std::vector<int> coords;
    int label;
    std::string rule;
};

/**
 * Boundary-rule violations of a labeling: corner e_k must carry k, a vertex
 * on a face must carry the index of one of that face's corners (coordinate
 * at the label is positive), and every label lies in 0..n.  Interior
 * vertices are unconstrained beyond the range.
 */
inline std::vector<Violation> check_admissible(const SubdivisionGrid& grid, const Labeling& lab)
{
    if (lab.dimension() != grid.dimension() || lab.subdivisions() != grid.subdivisions())
        throw InvalidInput("labeling does not belong to this grid");
    const int n = grid.dimension();
    const int m = grid.subdivisions();
    std::vector<Violation> out;
    for (std::size_t v = 0; v < grid.vertex_count(); ++v)
    {
        const auto a = grid.vertex(v);
        const int l = lab[v];
        auto report = [&](std::string rule) {
            out.push_back({v, std::vector<int>(a.begin(), a.end()), l, std::move(rule)});
        };
        if (l < 0 || l > n)
        {
            report("label out of range 0.." + std::to_string(n));
            continue;
        }
        const auto corner = std::find(a.begin(), a.end(), m);
        if (corner != a.end())
        {
            const int k = static_cast<int>(corner - a.begin());
            if (l != k)
                report("corner e" + std::to_string(k) + " must be labeled " + std::to_string(k));
            continue;
        }
        if (a[l] == 0)
            report("boundary vertex labeled with an index outside its face");
    }
    return out;
}

/** Standard labeling induced by f on every grid vertex. */
template <SimplexMap F>
Labeling label_from_function(const SubdivisionGrid& grid, const F& f, unsigned threads = 1)
{
    const int m = grid.subdivisions();
    std::vector<int> labels(grid.vertex_count());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v)
        {
            const auto a = grid.vertex(v);
            const auto p = lattice_point(a, m);
            labels[v] = standard_label(a, m, checked_image(f, p));
        }
    };
    threads = std::max(1u, threads);
    if (threads == 1)
    {
        work(0, labels.size());
    }
    else
    {
        // Errors inside workers are rethrown after join.
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
        {
            const std::size_t b = labels.size() * t / threads;
            const std::size_t e = labels.size() * (t + 1) / threads;
            pool.emplace_back([&, t, b, e] {
                try
                {
                    work(b, e);
                }
                catch (...)
                {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool)
            th.join();
        for (auto& err : errors)
            if (err)
                std::rethrow_exception(err);
    }
    return Labeling(grid.dimension(), m, std::move(labels));
}

/** True iff the cell's labels are exactly {0, ..., n}. */
inline bool is_fully_labeled(const SubdivisionGrid& grid, std::size_t cell, const Labeling& lab)
{
    const int n = grid.dimension();
    std::vector<bool> seen(n + 1, false);
    for (std::uint32_t v : grid.cell(cell))
    {
        const int l = lab[v];
        if (l < 0 || l > n || seen[l])
            return false;
        seen[l] = true;
    }
    return true;
}

}   // namespace fixsim
