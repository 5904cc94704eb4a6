#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fixsim/errors.hpp"
#include "fixsim/labeling.hpp"
#include "fixsim/simplex_core.hpp"

namespace fixsim {

enum class SearchStrategy
{
    exhaustive,
    path,
    automatic,   // exhaustive up to 10^6 cells, path above
};

inline constexpr std::uint64_t kExhaustiveCellLimit = 1'000'000ULL;

/** Number of fully labeled cells, by scanning every cell. */
inline std::uint64_t count_fully_labeled(const SubdivisionGrid& grid, const Labeling& lab,
                                         unsigned threads = 1)
{
    threads = std::max(1u, threads);
    std::vector<std::uint64_t> partial(threads, 0);
    auto scan = [&](unsigned t, std::size_t b, std::size_t e) {
        std::uint64_t count = 0;
        for (std::size_t c = b; c < e; ++c)
            count += is_fully_labeled(grid, c, lab) ? 1 : 0;
        partial[t] = count;
    };
    const auto ranges = grid.cell_ranges(threads);
    if (threads == 1)
    {
        scan(0, ranges[0].first, ranges[0].second);
    }
    else
    {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(scan, t, ranges[t].first, ranges[t].second);
        for (auto& th : pool)
            th.join();
    }
    std::uint64_t total = 0;
    for (auto c : partial)
        total += c;
    return total;
}

struct DoorPathResult
{
    KuhnCell cell;                 // fully labeled n-cell
    std::vector<int> labels;       // labels of its vertices, staircase order
    std::uint64_t cells_visited;   // n-dimensional cells entered
    std::uint64_t steps;           // cells entered in any dimension
};

/**
 * Door-to-door walk to a fully labeled cell on the implicit m-fold grid.
 *
 * The walk threads the faces F_0 = {e_0} c F_1 c ... c F_n (F_d spanned by
 * corners 0..d).  Inside F_d it moves between d-cells through doors, facets
 * labeled exactly {0..d-1}.  A d-cell labeled {0..d} is the door into the
 * unique (d+1)-cell of F_{d+1} on top of it; a door lying on F_{d-1} leads
 * back down into F_{d-1}.  Every node of this graph has degree two except
 * the corner e_0 and the fully labeled n-cells, so starting at e_0 the walk
 * ends at a fully labeled n-cell without revisiting anything.
 *
 * `label(coords)` returns the label of a lattice tuple (length n+1);
 * `visit(cell)` is called for every n-cell entered.
 */
template <class LabelFn, class Visit>
DoorPathResult door_path(int n, int m, LabelFn&& label, Visit&& visit)
{
    if (n < 1 || m < 1)
        throw InvalidInput("door_path needs n >= 1 and m >= 1");

    std::uint64_t step_limit = 1;
    for (int d = 1; d <= n; ++d)
    {
        const auto c = cell_count(d, m);
        step_limit = (c == kSaturated || step_limit + c < step_limit) ? kSaturated : step_limit + c;
    }

    int d = 1;
    KuhnCell cell{{0}, {0}};
    std::vector<int> labels;
    DoorPathResult result{};

    auto vertex_label = [&](int i) {
        const auto y = cell.cumulative_vertex(i);
        const int l = label(cumulative_to_lattice(y, n, m));
        if (l < 0 || l > d)
            throw SearchExhausted("vertex label " + std::to_string(l) + " on a " + std::to_string(d)
                                  + "-face: labeling is not admissible");
        return l;
    };
    auto enter = [&] {
        ++result.steps;
        if (result.steps > step_limit)
            throw SearchExhausted("door path exceeded " + std::to_string(step_limit) + " steps");
        if (d == n)
        {
            ++result.cells_visited;
            visit(cell);
        }
    };
    auto full = [&] {
        std::vector<bool> seen(d + 1, false);
        for (int l : labels)
        {
            if (seen[l])
                return false;
            seen[l] = true;
        }
        return true;
    };

    labels = {vertex_label(0), vertex_label(1)};
    if (labels[0] != 0)
        throw SearchExhausted("corner e0 is not labeled 0");
    enter();
    int came = d;   // vertex not on the door we entered through

    while (true)
    {
        int exit_vertex = -1;
        if (full())
        {
            if (d == n)
            {
                result.cell = cell;
                result.labels = labels;
                return result;
            }
            // Up into F_{d+1}.
            cell.base.push_back(0);
            cell.axes.push_back(d);
            ++d;
            labels.push_back(vertex_label(d));
            enter();
            came = d;
            continue;
        }
        // One label is duplicated; leave through the door that excludes its other copy.
        for (int j = 0; j <= d; ++j)
            if (j != came && labels[j] == labels[came])
                exit_vertex = j;
        if (exit_vertex < 0)
            throw SearchExhausted("cell without a second door: labeling is not admissible");

        while (true)
        {
            if (auto next = kuhn_pivot(cell, exit_vertex, m))
            {
                cell = std::move(next->cell);
                if (next->new_vertex == 0)
                {
                    labels.pop_back();
                    labels.insert(labels.begin(), 0);
                }
                else if (next->new_vertex == d)
                {
                    labels.erase(labels.begin());
                    labels.push_back(0);
                }
                labels[next->new_vertex] = vertex_label(next->new_vertex);
                came = next->new_vertex;
                enter();
                break;
            }
            // The door lies on the boundary of F_d; only F_{d-1} can carry it.
            if (exit_vertex != d || cell.axes.back() != d - 1 || cell.base.back() != 0)
                throw SearchExhausted("door path reached a boundary facet without a door");
            cell.base.pop_back();
            cell.axes.pop_back();
            labels.pop_back();
            --d;
            if (d == 0)
                throw SearchExhausted("door path returned to the starting corner");
            ++result.steps;
            // Fully labeled in F_d and entered from above: leave by dropping label d.
            exit_vertex = static_cast<int>(std::find(labels.begin(), labels.end(), d) - labels.begin());
        }
    }
}

template <class LabelFn>
DoorPathResult door_path(int n, int m, LabelFn&& label)
{
    return door_path(n, m, std::forward<LabelFn>(label), [](const KuhnCell&) {});
}

/**
 * A fully labeled cell of an admissible labeling.  The exhaustive strategy
 * returns the smallest such cell id; the path strategy the end of the door
 * walk.  SearchExhausted signals an inadmissible labeling.
 */
inline std::size_t find_fully_labeled(const SubdivisionGrid& grid, const Labeling& lab,
                                      SearchStrategy strategy = SearchStrategy::automatic)
{
    if (strategy == SearchStrategy::automatic)
        strategy = grid.cell_count() <= kExhaustiveCellLimit ? SearchStrategy::exhaustive
                                                             : SearchStrategy::path;
    if (strategy == SearchStrategy::exhaustive)
    {
        for (std::size_t c = 0; c < grid.cell_count(); ++c)
            if (is_fully_labeled(grid, c, lab))
                return c;
        throw SearchExhausted("no fully labeled cell: labeling is not admissible");
    }

    std::vector<bool> visited(grid.cell_count(), false);
    const auto res = door_path(
        grid.dimension(), grid.subdivisions(),
        [&](const std::vector<int>& coords) { return lab.label_of(coords); },
        [&](const KuhnCell& kc) {
            const auto id = grid.find_cell(kc);
            if (!id)
                throw SearchExhausted("door path left the grid");
            if (visited[*id])
                throw SearchExhausted("door path revisited cell " + std::to_string(*id));
            visited[*id] = true;
        });
    const auto id = grid.find_cell(res.cell);
    if (!id || !is_fully_labeled(grid, *id, lab))
        throw SearchExhausted("door path ended on a cell that is not fully labeled");
    return *id;
}

}   // namespace fixsim
