#include <catch_amalgamated.hpp>

#include <random>

#include "fixsim/fixsim.hpp"
#include "oracle_values.hpp"
#include "support.hpp"

using namespace fixsim;

namespace {

Labeling with_label(const SubdivisionGrid& g, std::initializer_list<int> coords, int label, Labeling base)
{
    std::vector<int> labels(base.labels().begin(), base.labels().end());
    labels[g.vertex_id(std::vector<int>(coords))] = label;
    return Labeling(g.dimension(), g.subdivisions(), std::move(labels));
}

// A random continuous self-map: g_i = c_i + sum_j b_ij x_j^p_ij with positive coefficients.
MapSpec random_map(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> coef(0.01, 1.0);
    std::uniform_int_distribution<int> power(1, 3);
    std::string text;
    for (int i = 0; i <= n; ++i)
    {
        text += (i ? "; g" : "g") + std::to_string(i) + " = " + std::to_string(coef(rng) * 0.1);
        for (int j = 0; j <= n; ++j)
            text += " + " + std::to_string(coef(rng)) + " * x" + std::to_string(j) + "^"
                    + std::to_string(power(rng));
    }
    return parse_map(text, n);
}

}   // namespace

TEST_CASE("boundary rules", "[labeling]")
{
    const SubdivisionGrid g(2, 3);
    std::mt19937_64 rng(1);
    const Labeling ok = testing_support::random_admissible(g, rng);
    CHECK(check_admissible(g, ok).empty());

    // Corner (m,0,0) labeled 0.
    CHECK(check_admissible(g, with_label(g, {3, 0, 0}, 0, ok)).empty());
    CHECK(check_admissible(g, with_label(g, {3, 0, 0}, 1, ok)).size() == 1);
    // Interior vertex: any label.
    for (int l = 0; l <= 2; ++l)
        CHECK(check_admissible(g, with_label(g, {1, 1, 1}, l, ok)).empty());
    // Edge vertex labeled off its face.
    const auto bad = check_admissible(g, with_label(g, {2, 1, 0}, 2, ok));
    REQUIRE(bad.size() == 1);
    CHECK(bad.front().coords == std::vector<int>{2, 1, 0});
    CHECK(bad.front().label == 2);
    // Out of range.
    CHECK_FALSE(check_admissible(g, with_label(g, {1, 1, 1}, 3, ok)).empty());
    CHECK_FALSE(check_admissible(g, with_label(g, {1, 1, 1}, -1, ok)).empty());
}

TEST_CASE("labeling size must match the grid", "[labeling]")
{
    CHECK_THROWS_AS(Labeling(2, 2, {0, 1, 2}), InvalidInput);
    CHECK_NOTHROW(Labeling(2, 2, {0, 0, 0, 1, 1, 2}));
}

TEST_CASE("standard labeling of pull t=0.3 at a corner", "[labeling]")
{
    const MapSpec f = MapSpec::pull(2, 0.3);
    const std::vector<double> e0{1, 0, 0};
    const auto img = f(e0);
    CHECK(img[0] == Catch::Approx(oracle::kPullCorner).epsilon(1e-15));
    CHECK(standard_label(std::vector<int>{4, 0, 0}, 4, img) == 0);
}

TEST_CASE("induced labelings are admissible and satisfy the label inequality", "[labeling]")
{
    std::mt19937_64 rng(42);
    std::vector<std::pair<int, MapSpec>> maps;
    for (int n = 1; n <= 3; ++n)
    {
        maps.emplace_back(n, MapSpec::identity(n));
        maps.emplace_back(n, MapSpec::rotate(n));
        maps.emplace_back(n, MapSpec::pull(n, 0.5));
    }
    for (int k = 0; k < 100; ++k)
    {
        const int n = 1 + k % 3;
        maps.emplace_back(n, random_map(n, rng));
    }
    int index = 0;
    for (const auto& [n, f] : maps)
    {
        const int m = 1 + (index++ % 8);
        const SubdivisionGrid g(n, m);
        const Labeling lab = label_from_function(g, f);
        CHECK(check_admissible(g, lab).empty());
        for (std::size_t v = 0; v < g.vertex_count(); ++v)
        {
            const auto a = g.vertex(v);
            const auto x = lattice_point(a, m);
            const auto fx = f(x);
            const int l = lab[v];
            CHECK(a[l] > 0);
            // Smallest qualifying index, or the carrier with the smallest gap after rounding.
            bool exists = false;
            for (int i = 0; i <= n; ++i)
                exists = exists || (a[i] > 0 && fx[i] <= x[i]);
            if (exists)
            {
                CHECK(fx[l] <= x[l]);
                for (int i = 0; i < l; ++i)
                    CHECK_FALSE((a[i] > 0 && fx[i] <= x[i]));
            }
        }
    }
}

TEST_CASE("threaded labeling equals the sequential one", "[labeling]")
{
    std::mt19937_64 rng(8);
    const MapSpec f = random_map(3, rng);
    const SubdivisionGrid g(3, 9);
    CHECK(label_from_function(g, f, 1) == label_from_function(g, f, 3));
}

TEST_CASE("map range errors surface while labeling", "[labeling]")
{
    auto bad = [](std::span<const double> x) { return std::vector<double>(x.size(), 0.7); };
    CHECK_THROWS_AS(label_from_function(SubdivisionGrid(2, 2), bad), MapRangeError);
    auto nan = [](std::span<const double> x) {
        std::vector<double> out(x.begin(), x.end());
        out[0] = std::nan("");
        return out;
    };
    CHECK_THROWS_AS(label_from_function(SubdivisionGrid(2, 2), nan, 2), MapRangeError);
}

TEST_CASE("labeling JSON round trip", "[labeling]")
{
    std::mt19937_64 rng(2);
    const SubdivisionGrid g(3, 3);
    const Labeling lab = testing_support::random_admissible(g, rng);
    const Json j = labeling_to_json(g, lab);
    CHECK(j["n"] == 3);
    CHECK(j["m"] == 3);
    CHECK(j["labels"].size() == g.vertex_count());
    CHECK(labeling_from_json(j) == lab);

    Json dup = j;
    dup["labels"].push_back(dup["labels"][0]);
    CHECK_THROWS_AS(labeling_from_json(dup), InvalidInput);
    Json missing = j;
    missing["labels"].erase(missing["labels"].begin());
    CHECK_THROWS_AS(labeling_from_json(missing), InvalidInput);
    Json off = j;
    off["labels"][0]["v"] = {1, 1, 1, 1};
    CHECK_THROWS_AS(labeling_from_json(off), InvalidInput);
    CHECK_THROWS_AS(labeling_from_json(Json{{"n", 2}}), InvalidInput);
}
