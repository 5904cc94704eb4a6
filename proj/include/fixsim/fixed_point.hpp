#pragma once

/**
 * Approximate and refined fixed points of self-maps of the simplex.
 *
 * approx_fixed_point subdivides the simplex, labels the vertices with the
 * standard Sperner labeling and returns a vertex of a fully labeled cell.
 * For a cell of max-norm diameter h and a map whose modulus of continuity
 * bounds |f(x) - f(y)| by w(h) whenever |x - y| <= h, every vertex z of such
 * a cell satisfies |f(z) - z| <= n (h + w(h)): the vertex labeled i gives
 * f_i - x_i <= 0, continuity moves this to z with error at most h + w(h)
 * per coordinate, and the displacements sum to zero.
 *
 * refine_fixed_point drives the tolerance through eps_k = 2^-k and checks,
 * at every level below a floor, whether two points at distance >= delta
 * both have residual < eps_k.  Finding such a pair is a non-contraction
 * witness; not finding one lets the iterates settle into a Cauchy sequence.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fixsim/errors.hpp"
#include "fixsim/labeling.hpp"
#include "fixsim/simplex_core.hpp"
#include "fixsim/sperner_search.hpp"

namespace fixsim {

/**
 * Uniform continuity data: either a Lipschitz constant or a table of
 * (eps, delta) pairs meaning |x - y| <= delta implies |f(x) - f(y)| <= eps.
 */
class ModulusOfContinuity
{
    public:
        static ModulusOfContinuity lipschitz(double constant, bool heuristic = false)
        {
            if (!(constant >= 0) || !std::isfinite(constant))
                throw InvalidInput("Lipschitz constant must be a finite number >= 0");
            ModulusOfContinuity w;
            w.lipschitz_ = constant;
            w.heuristic_ = heuristic;
            return w;
        }

        static ModulusOfContinuity table(std::vector<std::pair<double, double>> eps_delta)
        {
            if (eps_delta.empty())
                throw InvalidInput("modulus table is empty");
            std::sort(eps_delta.begin(), eps_delta.end());
            for (std::size_t i = 0; i < eps_delta.size(); ++i)
            {
                const auto [eps, delta] = eps_delta[i];
                if (!(eps > 0) || !(delta > 0))
                    throw InvalidInput("modulus table entries need eps > 0 and delta > 0");
                if (i > 0 && delta < eps_delta[i - 1].second)
                    throw InvalidInput("modulus table delta must be nondecreasing in eps");
            }
            ModulusOfContinuity w;
            w.table_ = std::move(eps_delta);
            return w;
        }

        /** Bound on |f(x) - f(y)| whenever |x - y| <= delta (max-norm). */
        double variation(double delta) const
        {
            if (lipschitz_)
                return *lipschitz_ * delta;
            for (const auto& [eps, d] : table_)
                if (d >= delta)
                    return eps;
            return 1.0;   // images lie in the simplex
        }

        /** Largest tabulated delta certifying variation <= eps; 0 when none is known. */
        double delta_for(double eps) const
        {
            if (lipschitz_)
                return *lipschitz_ == 0 ? 1.0 : eps / *lipschitz_;
            double best = 0;
            for (const auto& [e, d] : table_)
                if (e <= eps)
                    best = std::max(best, d);
            return best;
        }

        bool heuristic() const { return heuristic_; }
        std::optional<double> lipschitz_constant() const { return lipschitz_; }

    private:
        ModulusOfContinuity() = default;

        std::optional<double> lipschitz_;
        std::vector<std::pair<double, double>> table_;
        bool heuristic_ = false;
};

template <SimplexMap F>
double residual(const F& f, std::span<const double> p)
{
    const auto image = checked_image(f, p);
    return max_norm_distance<double>(image, p);
}

/** Uniformly distributed point of the simplex spanned by `corners`. */
inline std::vector<double> random_point_in(const std::vector<std::vector<double>>& corners,
                                           std::mt19937_64& rng)
{
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> w(corners.size());
    double total = 0;
    for (double& x : w)
        total += (x = exp1(rng));
    std::vector<double> p(corners.front().size(), 0.0);
    for (std::size_t k = 0; k < corners.size(); ++k)
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] += w[k] / total * corners[k][i];
    return p;
}

/**
 * Sampled Lipschitz estimate (largest observed ratio, doubled).  The result
 * is flagged heuristic: finitely many samples certify nothing.
 */
template <SimplexMap F>
ModulusOfContinuity estimate_modulus(const F& f, int n, int samples = 4000, std::uint64_t seed = 7)
{
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> corners(n + 1, std::vector<double>(n + 1, 0.0));
    for (int i = 0; i <= n; ++i)
        corners[i][i] = 1.0;
    std::uniform_real_distribution<double> scale(-8.0, -1.0);
    double worst = 0;
    for (int s = 0; s < samples; ++s)
    {
        const auto x = random_point_in(corners, rng);
        const auto dir = random_point_in(corners, rng);
        const double t = std::pow(10.0, scale(rng));
        std::vector<double> y(n + 1);
        for (int i = 0; i <= n; ++i)
            y[i] = (1 - t) * x[i] + t * dir[i];
        const double dx = max_norm_distance<double>(x, y);
        if (dx <= 0)
            continue;
        const auto fx = checked_image(f, x);
        const auto fy = checked_image(f, y);
        worst = std::max(worst, max_norm_distance<double>(fx, fy) / dx);
    }
    return ModulusOfContinuity::lipschitz(2 * worst, true);
}

/** n (h + w(h)) for cells of diameter h. */
inline double residual_bound(int n, double cell_diameter, const ModulusOfContinuity& w)
{
    return n * (cell_diameter + w.variation(cell_diameter));
}

/** Smallest subdivision count whose residual bound is below eps. */
inline std::int64_t grid_size_for(int n, double eps, const ModulusOfContinuity& w)
{
    if (!(eps > 0))
        throw InvalidInput("tolerance must be > 0");
    constexpr std::int64_t kMax = std::int64_t{1} << 40;
    auto ok = [&](std::int64_t m) { return residual_bound(n, 1.0 / static_cast<double>(m), w) < eps; };
    if (auto L = w.lipschitz_constant())
    {
        const double m = std::floor(n * (1 + *L) / eps) + 1;
        if (m > static_cast<double>(kMax))
            throw ResourceLimit("tolerance " + std::to_string(eps) + " needs an impractically fine grid");
        auto mi = static_cast<std::int64_t>(m);
        while (mi > 1 && ok(mi - 1))
            --mi;
        while (!ok(mi))
            ++mi;
        return mi;
    }
    std::int64_t hi = 1;
    while (!ok(hi))
    {
        if (hi >= kMax)
            throw ResourceLimit("modulus table is too coarse for tolerance " + std::to_string(eps));
        hi *= 2;
    }
    std::int64_t lo = hi / 2;   // !ok(lo) unless hi == 1
    if (hi == 1)
        return 1;
    while (hi - lo > 1)
    {
        const std::int64_t mid = lo + (hi - lo) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

struct SolverOptions
{
    std::uint64_t cell_budget = default_cell_budget();
    SearchStrategy strategy = SearchStrategy::automatic;
    unsigned threads = 1;
};

struct ApproxFixedPoint
{
    BarycentricPoint<double> point;
    double residual = 0;
    std::int64_t m = 0;                          // subdivision count used
    std::vector<std::vector<double>> cell;       // vertices of the fully labeled cell
    std::vector<int> labels;                     // their labels
};

namespace detail {

struct LatticeCell
{
    std::vector<std::vector<int>> vertices;
    std::vector<int> labels;
};

/**
 * Vertices of a fully labeled cell for the standard labeling of g on the
 * m-fold grid.  The exhaustive scan materializes the grid, so m^n must fit
 * the cell budget; the door path never does, and the budget caps the cells
 * it enters instead.
 */
template <SimplexMap G>
LatticeCell fully_labeled_cell(const G& g, int n, std::int64_t m, const SolverOptions& opt)
{
    if (m > (1 << 30))
        throw ResourceLimit("grid with m = " + std::to_string(m) + " is too fine");
    const int mi = static_cast<int>(m);
    const std::uint64_t cells = cell_count(n, mi);
    SearchStrategy strategy = opt.strategy;
    if (strategy == SearchStrategy::automatic)
        strategy = cells <= std::min(kExhaustiveCellLimit, opt.cell_budget) ? SearchStrategy::exhaustive
                                                                            : SearchStrategy::path;

    LatticeCell out;
    if (strategy == SearchStrategy::exhaustive)
    {
        if (cells > opt.cell_budget)
            throw ResourceLimit("grid with m = " + std::to_string(m) + " in dimension " + std::to_string(n)
                                + " exceeds the cell budget of " + std::to_string(opt.cell_budget));
        const SubdivisionGrid grid(n, mi, opt.cell_budget);
        const Labeling lab = label_from_function(grid, g, opt.threads);
        const std::size_t c = find_fully_labeled(grid, lab, SearchStrategy::exhaustive);
        for (std::uint32_t v : grid.cell(c))
        {
            const auto a = grid.vertex(v);
            out.vertices.emplace_back(a.begin(), a.end());
            out.labels.push_back(lab[v]);
        }
        return out;
    }
    std::uint64_t entered = 0;
    const auto res = door_path(
        n, mi,
        [&](const std::vector<int>& a) { return standard_label(a, mi, checked_image(g, lattice_point(a, mi))); },
        [&](const KuhnCell&) {
            if (++entered > opt.cell_budget)
                throw ResourceLimit("door path on the " + std::to_string(m) + "-fold grid entered more than "
                                    + std::to_string(opt.cell_budget) + " cells");
        });
    out.vertices = kuhn_vertices(res.cell, n, mi);
    out.labels = res.labels;
    return out;
}

/** The sub-simplex {x : x_i >= lower_i} = lower + radius * simplex. */
struct Region
{
    std::vector<double> lower;
    double radius = 1;

    static Region whole(int n) { return {std::vector<double>(n + 1, 0.0), 1.0}; }

    /** Smallest such region containing the max-norm box of half-width rho around x. */
    static Region around(std::span<const double> x, double rho)
    {
        Region r{std::vector<double>(x.size(), 0.0), 1.0};
        double sum = 0;
        for (std::size_t i = 0; i < x.size(); ++i)
            sum += (r.lower[i] = std::max(0.0, x[i] - rho));
        r.radius = 1 - sum;
        if (r.radius >= 1 || r.radius <= 0)
            return whole(static_cast<int>(x.size()) - 1);
        return r;
    }

    bool is_whole() const { return radius >= 1; }

    std::vector<double> to_global(std::span<const double> y) const
    {
        std::vector<double> x(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            x[i] = lower[i] + radius * y[i];
        return x;
    }
};

/** f seen in the local coordinates of a region, composed with the retraction onto it. */
template <SimplexMap F>
struct LocalMap
{
    const F& f;
    const Region& region;

    std::vector<double> operator()(std::span<const double> y) const
    {
        const auto fx = checked_image(f, region.to_global(y));
        std::vector<double> g(fx.size());
        double total = 0;
        for (std::size_t i = 0; i < fx.size(); ++i)
            total += (g[i] = std::max(0.0, fx[i] - region.lower[i]));
        for (double& v : g)
            v /= total;
        return g;
    }
};

}   // namespace detail

/** Approximate fixed point on the m-fold grid: best vertex of a fully labeled cell. */
template <SimplexMap F>
ApproxFixedPoint approx_fixed_point_on_grid(const F& f, int n, std::int64_t m, const SolverOptions& opt = {})
{
    if (n < 1 || m < 1)
        throw InvalidInput("approx_fixed_point_on_grid needs n >= 1 and m >= 1");
    const auto cell = detail::fully_labeled_cell(f, n, m, opt);
    ApproxFixedPoint out;
    out.m = m;
    out.labels = cell.labels;
    out.residual = std::numeric_limits<double>::infinity();
    for (const auto& a : cell.vertices)
    {
        auto p = lattice_point(a, static_cast<int>(m));
        const double r = residual(f, p);
        if (r < out.residual)
        {
            out.residual = r;
            out.point = BarycentricPoint<double>(p);
        }
        out.cell.push_back(std::move(p));
    }
    return out;
}

/**
 * A point with |f(x) - x| < eps: the best vertex of a fully labeled cell on
 * the coarsest grid whose residual bound n (1/m + w(1/m)) is below eps.
 */
template <SimplexMap F>
ApproxFixedPoint approx_fixed_point(const F& f, int n, double eps, const ModulusOfContinuity& w,
                                    const SolverOptions& opt = {})
{
    return approx_fixed_point_on_grid(f, n, grid_size_for(n, eps, w), opt);
}

namespace detail {

struct RegionSolve
{
    ApproxFixedPoint approx;
    double radius;
};

/**
 * approx_fixed_point restricted to a sub-simplex around `center`.  The grid
 * on the region has the same cell diameter the global bound asks for, so a
 * result is accepted only after its true residual is measured; a region
 * whose retraction was active at the cell is widened, otherwise the grid is
 * refined.  A center whose own residual is already below eps is returned
 * as is (m = 0, radius 0): the door path on a retracted region can miss a
 * fixed point sitting exactly at the center.
 */
template <SimplexMap F>
RegionSolve solve_near(const F& f, int n, std::span<const double> center, double rho, double eps,
                       const ModulusOfContinuity& w, const SolverOptions& opt)
{
    {
        const double r = residual(f, center);
        if (r < eps)
        {
            ApproxFixedPoint here;
            here.point = BarycentricPoint<double>(std::vector<double>(center.begin(), center.end()));
            here.m = 0;
            here.residual = r;
            here.cell.emplace_back(center.begin(), center.end());
            return {std::move(here), 0.0};
        }
    }
    const std::int64_t global_m = grid_size_for(n, eps, w);
    double refine = 1;
    for (int attempt = 0; attempt < 64; ++attempt)
    {
        const Region region = Region::around(center, rho);
        const double want = std::ceil(region.radius * static_cast<double>(global_m) * refine);
        const std::int64_t m = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::min(want, 1e12)));
        const LocalMap<F> g{f, region};
        const auto cell = fully_labeled_cell(g, n, m, opt);

        ApproxFixedPoint best;
        best.m = m;
        best.labels = cell.labels;
        best.residual = std::numeric_limits<double>::infinity();
        bool retraction_active = false;
        for (const auto& a : cell.vertices)
        {
            auto x = region.to_global(lattice_point(a, static_cast<int>(m)));
            const auto fx = checked_image(f, x);
            for (std::size_t i = 0; i < fx.size(); ++i)
                retraction_active = retraction_active || fx[i] < region.lower[i];
            const double r = max_norm_distance<double>(fx, x);
            if (r < best.residual)
            {
                best.residual = r;
                best.point = BarycentricPoint<double>(x);
            }
            best.cell.push_back(std::move(x));
        }
        if (best.residual < eps)
            return {std::move(best), region.radius};
        if (retraction_active && !region.is_whole())
            rho *= 4;
        else
            refine *= 2;
    }
    throw ResourceLimit("could not reach residual " + std::to_string(eps));
}

}   // namespace detail

struct PairSample
{
    std::vector<double> x;
    std::vector<double> y;
    double residual_x = 0;
    double residual_y = 0;
    double distance = 0;
    double value = 0;   // max(residual_x, residual_y)
};

/**
 * Among the corners of a simplex, `extra` points and `samples` uniform
 * random points, the pair at distance >= delta minimizing the larger of the
 * two residuals; nullopt when no pair is that far apart.
 */
template <SimplexMap F>
std::optional<PairSample> best_pair_in_simplex(const F& f, const std::vector<std::vector<double>>& corners,
                                               double delta, int samples, std::mt19937_64& rng,
                                               const std::vector<std::vector<double>>& extra = {})
{
    std::vector<std::vector<double>> pts = corners;
    pts.insert(pts.end(), extra.begin(), extra.end());
    for (int s = 0; s < samples; ++s)
        pts.push_back(random_point_in(corners, rng));
    std::vector<double> res(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        res[i] = residual(f, pts[i]);

    std::optional<PairSample> best;
    for (std::size_t i = 0; i < pts.size(); ++i)
    {
        for (std::size_t j = i + 1; j < pts.size(); ++j)
        {
            const double dist = max_norm_distance<double>(pts[i], pts[j]);
            if (dist < delta)
                continue;
            const double value = std::max(res[i], res[j]);
            if (!best || value < best->value)
                best = PairSample{pts[i], pts[j], res[i], res[j], dist, value};
        }
    }
    return best;
}

/**
 * Sampled upper estimate of inf over pairs (x, y) in the cell with
 * |x - y| >= delta of max(|f(x) - x|, |f(y) - y|).
 */
template <SimplexMap F>
double sampled_pair_infimum(const F& f, const SubdivisionGrid& grid, std::size_t cell, double delta,
                            int samples, std::uint64_t seed = 11)
{
    if (!(delta > 0))
        throw InvalidInput("delta must be > 0");
    if (samples < 1)
        throw InvalidInput("samples must be >= 1");
    std::vector<std::vector<double>> corners;
    for (std::uint32_t v : grid.cell(cell))
        corners.push_back(lattice_point(grid.vertex(v), grid.subdivisions()));
    std::mt19937_64 rng(seed);
    const auto best = best_pair_in_simplex(f, corners, delta, samples, rng);
    if (!best)
        throw EmptyPairSet("no sampled pair is " + std::to_string(delta) + " apart");
    return best->value;
}

struct RefineOptions
{
    std::optional<double> delta_check;     // default 10 * tol
    std::optional<double> witness_floor;   // default delta_check / 64
    int pair_samples = 48;
    int max_level = 60;
    std::uint64_t seed = 0x5eed;
    SolverOptions solver;
};

enum class FixedPointStatus
{
    converged,
    non_contraction_witness,
};

inline const char* to_string(FixedPointStatus s)
{
    return s == FixedPointStatus::converged ? "Converged" : "NonContractionWitness";
}

struct TraceEntry
{
    int level = 0;
    double eps = 0;
    std::int64_t m = 0;
    double radius = 1;   // side of the searched sub-simplex, 1 for the whole simplex
    std::vector<double> point;
    double residual = 0;
};

struct NonContractionWitness
{
    std::vector<double> x;
    std::vector<double> y;
    double residual_x = 0;
    double residual_y = 0;
    double distance = 0;
    double eps = 0;
    double delta = 0;
};

struct FixedPointResult
{
    FixedPointStatus status = FixedPointStatus::converged;
    BarycentricPoint<double> point;
    double residual = 0;
    std::vector<TraceEntry> trace;
    std::optional<NonContractionWitness> witness;
    bool heuristic_modulus = false;
};

/**
 * Refinement loop x_k with |f(x_k) - x_k| < 2^-k, k = k0, k0+1, ...
 *
 * k0 is the smallest k with 2^-k at most the residual on the 4-fold grid,
 * capped at the first level below the witness floor.
 * Each iterate is searched on a sub-simplex around the previous one.  At
 * every level with 2^-k below the witness floor, the cell of diameter
 * >= 2 delta containing x_k is sampled for a pair at distance >= delta with
 * both residuals < 2^-k; such a pair ends the loop as a witness.  The loop
 * converges once such a level has passed without a witness, consecutive
 * iterates are within tol and the residual is within tol.
 */
template <SimplexMap F>
FixedPointResult refine_fixed_point(const F& f, int n, double tol, const ModulusOfContinuity& w,
                                    const RefineOptions& opt = {})
{
    if (!(tol > 0))
        throw InvalidInput("tolerance must be > 0");
    const double delta = opt.delta_check.value_or(10 * tol);
    if (!(delta > 0) || delta > 1)
        throw InvalidInput("delta_check must lie in (0, 1]");
    const double floor = opt.witness_floor.value_or(delta / 64);
    const int cover_m = std::max(1, static_cast<int>(std::floor(1 / (2 * delta))));

    FixedPointResult out;
    out.heuristic_modulus = w.heuristic();

    const auto start = approx_fixed_point_on_grid(f, n, 4, opt.solver);
    out.trace.push_back({0, 0, 4, 1, std::vector<double>(start.point.begin(), start.point.end()), start.residual});
    // A start that already sits on a fixed point must not push k0 past the floor level.
    const int floor_level = std::max(0, static_cast<int>(std::ceil(-std::log2(floor))));
    int k0 = floor_level;
    if (start.residual > 0)
        k0 = std::min(k0, std::max(0, static_cast<int>(std::ceil(-std::log2(start.residual)))));

    std::vector<double> prev(start.point.begin(), start.point.end());
    double prev_res = start.residual;
    for (int k = k0; k <= opt.max_level; ++k)
    {
        const double eps = std::ldexp(1.0, -k);
        const double rho = 8 * std::max(prev_res, eps);
        const auto solved = detail::solve_near(f, n, prev, rho, eps, w, opt.solver);
        std::vector<double> x(solved.approx.point.begin(), solved.approx.point.end());
        out.trace.push_back({k, eps, solved.approx.m, solved.radius, x, solved.approx.residual});

        if (eps <= floor)
        {
            std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(k));
            const auto cover = locate_kuhn_cell<double>(cover_m, x);
            std::vector<std::vector<double>> corners;
            for (const auto& a : kuhn_vertices(cover.cell, n, cover_m))
                corners.push_back(lattice_point(a, cover_m));
            const auto pair = best_pair_in_simplex(f, corners, delta, opt.pair_samples, rng, {x});
            if (pair && pair->value < eps)
            {
                out.status = FixedPointStatus::non_contraction_witness;
                out.point = solved.approx.point;
                out.residual = solved.approx.residual;
                out.witness = NonContractionWitness{pair->x, pair->y, pair->residual_x, pair->residual_y,
                                                    pair->distance, eps, delta};
                return out;
            }
            if (k > k0 && max_norm_distance<double>(x, prev) <= tol && solved.approx.residual <= tol)
            {
                out.status = FixedPointStatus::converged;
                out.point = solved.approx.point;
                out.residual = solved.approx.residual;
                return out;
            }
        }
        prev = std::move(x);
        prev_res = solved.approx.residual;
    }
    throw ResourceLimit("refinement did not converge by level " + std::to_string(opt.max_level));
}

}   // namespace fixsim
