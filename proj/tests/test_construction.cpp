#include <catch_amalgamated.hpp>

#include <random>

#include "fixsim/fixsim.hpp"
#include "oracle_values.hpp"
#include "support.hpp"

using namespace fixsim;

namespace {

Rational frac(std::pair<int, int> pq) { return Rational(pq.first, pq.second); }

std::vector<Rational> random_weights(int n, std::mt19937_64& rng)
{
    std::vector<long> w(n + 1);
    long total = 0;
    for (auto& x : w)
        total += (x = std::uniform_int_distribution<long>(1, 50)(rng));
    std::vector<Rational> out;
    for (auto x : w)
        out.emplace_back(x, total);
    return out;
}

BarycentricPoint<Rational> combine(const SubdivisionGrid& g, std::size_t cell, std::span<const Rational> lambda)
{
    const int n = g.dimension();
    std::vector<Rational> p(n + 1, Rational(0));
    const auto vs = g.cell(cell);
    for (int k = 0; k <= n; ++k)
        for (int i = 0; i <= n; ++i)
            p[i] += lambda[k] * Rational(g.vertex(vs[k])[i], g.subdivisions());
    return BarycentricPoint<Rational>(std::move(p));
}

Labeling relabel(const SubdivisionGrid& g, Labeling base, std::vector<int> coords, int label)
{
    std::vector<int> labels(base.labels().begin(), base.labels().end());
    labels[g.vertex_id(coords)] = label;
    return Labeling(g.dimension(), g.subdivisions(), std::move(labels));
}

}   // namespace

TEST_CASE("vertex images follow the perturbation formula", "[construction]")
{
    std::mt19937_64 rng(1);
    {
        auto g = std::make_shared<const SubdivisionGrid>(2, 4);
        const Labeling lab = relabel(*g, testing_support::random_admissible(*g, rng), {2, 1, 1}, 0);
        const VertexMap vm = build_vertex_map(g, lab, Rational(1, 8));
        const auto& img = vm.images[g->vertex_id(std::vector<int>{2, 1, 1})];
        for (int i = 0; i < 3; ++i)
            CHECK(img[i] == frac(oracle::kImage_a[i]));
    }
    {
        auto g = std::make_shared<const SubdivisionGrid>(2, 2);
        const Labeling lab = relabel(*g, testing_support::random_admissible(*g, rng), {0, 1, 1}, 1);
        const VertexMap vm = build_vertex_map(g, lab, Rational(1, 4));
        const auto& img = vm.images[g->vertex_id(std::vector<int>{0, 1, 1})];
        for (int i = 0; i < 3; ++i)
            CHECK(img[i] == frac(oracle::kImage_b[i]));
    }
}

TEST_CASE("tau validation", "[construction]")
{
    std::mt19937_64 rng(2);
    auto g = std::make_shared<const SubdivisionGrid>(2, 4);
    const Labeling lab = testing_support::random_admissible(*g, rng);
    CHECK(tau_upper_bound(*g, lab) == Rational(1, 4));
    CHECK(build_vertex_map(g, lab).tau == Rational(1, 8));
    CHECK_THROWS_AS(build_vertex_map(g, lab, Rational(1, 4)), TauTooLarge);
    CHECK_THROWS_AS(build_vertex_map(g, lab, Rational(1)), TauTooLarge);
    CHECK_THROWS_AS(build_vertex_map(g, lab, Rational(0)), InvalidInput);
    CHECK_NOTHROW(build_vertex_map(g, lab, Rational(249, 1000)));
    const Labeling bad = relabel(*g, lab, {4, 0, 0}, 2);
    CHECK_THROWS_AS(build_vertex_map(g, bad), InadmissibleLabeling);
}

TEST_CASE("an absent label shifts its coordinate by tau/n", "[construction]")
{
    // The frozen oracle value is tau/n = 1/16 for n = 2, tau = 1/8.
    std::mt19937_64 rng(3);
    int seen = 0;
    for (int trial = 0; trial < 40; ++trial)
    {
        auto g = std::make_shared<const SubdivisionGrid>(2, 4);
        const VertexMap vm = build_vertex_map(g, testing_support::random_admissible(*g, rng), Rational(1, 8));
        for (std::size_t c = 0; c < g->cell_count(); ++c)
        {
            const auto d = displacement_on_cell(vm, c);
            for (const auto& cd : d.coordinates)
            {
                if (cd.occurrence != LabelOccurrence::absent)
                    continue;
                ++seen;
                CHECK(*cd.constant() == frac(oracle::kAbsentDisplacement));
                for (int s = 0; s < 5; ++s)
                {
                    const auto lambda = random_weights(2, rng);
                    const auto z = combine(*g, c, lambda);
                    const auto fz = eval_constructed(vm, z);
                    CHECK(fz[cd.coordinate] - z[cd.coordinate] == frac(oracle::kAbsentDisplacement));
                }
            }
        }
    }
    CHECK(seen > 0);
}

TEST_CASE("fully labeled barycenters are exact fixed points", "[construction]")
{
    std::mt19937_64 rng(4);
    for (int n = 1; n <= 3; ++n)
        for (int m = 1; m <= 4; ++m)
        {
            auto g = std::make_shared<const SubdivisionGrid>(n, m);
            const VertexMap vm = build_vertex_map(g, testing_support::random_admissible(*g, rng));
            for (std::size_t c = 0; c < g->cell_count(); ++c)
            {
                const auto z = g->cell_barycenter<Rational>(c);
                const bool fixed = eval_constructed(vm, z) == z;
                CHECK(fixed == is_fully_labeled(*g, c, vm.labeling));
                if (is_fully_labeled(*g, c, vm.labeling))
                {
                    const std::vector<Rational> equal(n + 1, Rational(1, n + 1));
                    for (const auto& cd : displacement_on_cell(vm, c).coordinates)
                        CHECK(cd.at(equal) == 0);
                }
            }
            const auto fp = fixed_point_of_construction(vm);
            CHECK(eval_constructed(vm, fp.point) == fp.point);
            CHECK(is_fully_labeled(*g, fp.cell, vm.labeling));
            const auto loc = locate_cell(*g, fp.point);
            CHECK(loc.cell == fp.cell);
            for (const auto& w : loc.weights)
                CHECK(w == Rational(1, n + 1));
        }
}

TEST_CASE("one-dimensional hand solution", "[construction]")
{
    auto g = std::make_shared<const SubdivisionGrid>(1, 3);
    // Ids run (0,3), (1,2), (2,1), (3,0); labels 0,0,1,1 from e0 to e1.
    const Labeling lab(1, 3, {1, 1, 0, 0});
    const VertexMap vm = build_vertex_map(g, lab);
    const auto fp = fixed_point_of_construction(vm);
    CHECK(fp.point[0] == frac(oracle::kN1FixedCoord));
    CHECK(fp.point[1] == frac(oracle::kN1FixedCoord));
}

TEST_CASE("outputs stay on the simplex exactly", "[construction]")
{
    std::mt19937_64 rng(6);
    for (int n = 1; n <= 3; ++n)
    {
        auto g = std::make_shared<const SubdivisionGrid>(n, 3);
        const VertexMap vm = build_vertex_map(g, testing_support::random_admissible(*g, rng));
        for (int s = 0; s < 100; ++s)
        {
            const auto z = combine(*g, s % g->cell_count(), random_weights(n, rng));
            const auto fz = eval_constructed(vm, z);
            Rational sum = 0;
            for (const auto& c : fz)
            {
                CHECK(c >= 0);
                sum += c;
            }
            CHECK(sum == 1);
        }
    }
}

TEST_CASE("weights concentrate where the residual is small", "[construction]")
{
    std::mt19937_64 rng(7);
    for (int n = 1; n <= 3; ++n)
    {
        auto g = std::make_shared<const SubdivisionGrid>(n, 3);
        const VertexMap vm = build_vertex_map(g, testing_support::random_admissible(*g, rng));
        for (std::size_t c = 0; c < g->cell_count(); ++c)
        {
            if (!is_fully_labeled(*g, c, vm.labeling))
                continue;
            for (int s = 0; s < 200; ++s)
            {
                // Points near the barycenter as well as far from it.
                auto lambda = random_weights(n, rng);
                const Rational mix(1, 1 << (s % 12));
                for (auto& l : lambda)
                    l = mix * l + (1 - mix) * Rational(1, n + 1);
                const auto z = combine(*g, c, lambda);
                const auto fz = eval_constructed(vm, z);
                Rational rho = 0;
                for (int i = 0; i <= n; ++i)
                    rho = std::max<Rational>(rho, abs(fz[i] - z[i]));
                Rational spread = 0;
                for (const auto& l : lambda)
                    spread = std::max<Rational>(spread, abs(l - Rational(1, n + 1)));
                // spread <= c rho / tau with c = n/(n+1) <= n+1.
                CHECK(spread * vm.tau <= Rational(n, n + 1) * rho);
            }
        }
    }
}

TEST_CASE("Lipschitz constant on sampled pairs within cells", "[construction]")
{
    std::mt19937_64 rng(8);
    for (int n = 1; n <= 3; ++n)
        for (int m : {2, 4})
        {
            auto g = std::make_shared<const SubdivisionGrid>(n, m);
            auto vm = std::make_shared<const VertexMap>(build_vertex_map(g, testing_support::random_admissible(*g, rng)));
            const double L = ConstructedMap{vm}.lipschitz();
            // For n >= 3 the declared constant is not a proven bound; twice the perturbation term is.
            const double proven = n <= 2 ? L : 1 + 2 * (1 + 1.0 / n) * to_double(vm->tau) * m;
            for (std::size_t c = 0; c < g->cell_count(); ++c)
                for (int s = 0; s < 20; ++s)
                {
                    const auto x = combine(*g, c, random_weights(n, rng));
                    const auto y = combine(*g, c, random_weights(n, rng));
                    const auto fx = eval_constructed(*vm, x);
                    const auto fy = eval_constructed(*vm, y);
                    Rational dx = 0, df = 0;
                    for (int i = 0; i <= n; ++i)
                    {
                        dx = std::max<Rational>(dx, abs(x[i] - y[i]));
                        df = std::max<Rational>(df, abs(fx[i] - fy[i]));
                    }
                    CHECK(to_double(df) <= proven * to_double(dx) + 1e-15);
                }
        }
}

TEST_CASE("multi-occurrence cells are flagged", "[construction]")
{
    auto g = std::make_shared<const SubdivisionGrid>(2, 2);
    const Labeling lab(2, 2, {2, 2, 1, 2, 1, 0});
    REQUIRE(check_admissible(*g, lab).empty());
    const VertexMap vm = build_vertex_map(g, lab);
    bool flagged = false;
    for (std::size_t c = 0; c < g->cell_count(); ++c)
    {
        const auto d = displacement_on_cell(vm, c);
        flagged = flagged || d.has_multiple;
        CHECK(d.has_multiple == (!d.fully_labeled));
    }
    CHECK(flagged);
}

TEST_CASE("round trip against the floating point solver", "[construction]")
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 6; ++trial)
    {
        const int n = 1 + trial % 3;
        auto g = std::make_shared<const SubdivisionGrid>(n, 1 + trial % 4);
        const Labeling lab = testing_support::random_admissible(*g, rng);
        const auto rep = roundtrip_check(g, lab);
        CHECK(rep.floating.status == FixedPointStatus::converged);
        CHECK(rep.floating.residual <= 1e-6);
        CHECK(rep.floating_barycenter_exact);
        CHECK(is_fully_labeled(*g, rep.floating_cell, lab));
        const Json j = converse_to_json(*g, rep);
        CHECK(j["exact"] == true);
        CHECK(j["tau"] == to_fraction_string(rep.tau));
        CHECK(j["fixedPoint"].size() == static_cast<std::size_t>(n + 1));
        CHECK(j["cell"].size() == static_cast<std::size_t>(n + 1));
    }
}
