#include <catch_amalgamated.hpp>

#include <random>

#include "fixsim/fixsim.hpp"
#include "oracle_values.hpp"
#include "support.hpp"

using namespace fixsim;

namespace {

Labeling line_labeling(std::vector<int> labels)
{
    const int m = static_cast<int>(labels.size()) - 1;
    // Vertex ids are lexicographic ranks, so (0, m) comes first and (m, 0) last.
    std::reverse(labels.begin(), labels.end());
    return Labeling(1, m, std::move(labels));
}

int sign_changes(const SubdivisionGrid& g, const Labeling& lab)
{
    // Walk from e0 = (m, 0) to e1 = (0, m).
    int changes = 0;
    const int m = g.subdivisions();
    for (int k = 0; k < m; ++k)
    {
        const int a = lab.label_of(std::vector<int>{m - k, k});
        const int b = lab.label_of(std::vector<int>{m - k - 1, k + 1});
        changes += a != b;
    }
    return changes;
}

}   // namespace

TEST_CASE("one-dimensional counts", "[sperner]")
{
    const SubdivisionGrid g(1, 3);
    CHECK(count_fully_labeled(g, line_labeling({0, 0, 1, 1})) == oracle::kN1_0011);
    CHECK(count_fully_labeled(g, line_labeling({0, 1, 0, 1})) == oracle::kN1_0101);

    const SubdivisionGrid g2(1, 2);
    const Labeling lab = line_labeling({0, 1, 1});
    const auto ex = find_fully_labeled(g2, lab, SearchStrategy::exhaustive);
    const auto pa = find_fully_labeled(g2, lab, SearchStrategy::path);
    CHECK(ex == pa);
    CHECK(count_fully_labeled(g2, lab) == 1);
}

TEST_CASE("exhaustive parity matches the enumeration oracle", "[sperner]")
{
    for (const auto& [m, total, hist] : {std::tuple{2, oracle::kLabelings_2_2, oracle::kHistogram_2_2},
                                         std::tuple{3, oracle::kLabelings_2_3, oracle::kHistogram_2_3}})
    {
        const SubdivisionGrid g(2, m);
        int seen = 0;
        std::map<int, int> ours;
        testing_support::for_each_admissible(g, [&](const Labeling& lab) {
            ++seen;
            const auto c = count_fully_labeled(g, lab);
            ++ours[static_cast<int>(c)];
            CHECK(c % 2 == 1);
            CHECK(is_fully_labeled(g, find_fully_labeled(g, lab, SearchStrategy::path), lab));
        });
        CHECK(seen == total);
        CHECK(ours == hist);
    }
    const SubdivisionGrid g(3, 1);
    testing_support::for_each_admissible(g, [&](const Labeling& lab) { CHECK(count_fully_labeled(g, lab) == 1); });
}

TEST_CASE("random labelings: odd counts and agreeing strategies", "[sperner]")
{
    std::mt19937_64 rng(77);
    for (int k = 0; k < 1000; ++k)
    {
        const int n = 1 + k % 3;
        const int m = 1 + (k / 3) % 6;
        const SubdivisionGrid g(n, m);
        const Labeling lab = testing_support::random_admissible(g, rng);
        const auto count = count_fully_labeled(g, lab);
        CHECK(count % 2 == 1);
        CHECK(count_fully_labeled(g, lab, 3) == count);

        std::uint64_t visited = 0;
        const auto res = door_path(
            n, m, [&](const std::vector<int>& a) { return lab.label_of(a); },
            [&](const KuhnCell&) { ++visited; });
        CHECK(visited <= g.cell_count());
        const auto id = g.find_cell(res.cell);
        REQUIRE(id);
        CHECK(is_fully_labeled(g, *id, lab));
        CHECK(is_fully_labeled(g, find_fully_labeled(g, lab, SearchStrategy::exhaustive), lab));
    }
}

TEST_CASE("n=3, m=2 random labelings agree", "[sperner]")
{
    std::mt19937_64 rng(9);
    const SubdivisionGrid g(3, 2);
    for (int k = 0; k < 200; ++k)
    {
        const Labeling lab = testing_support::random_admissible(g, rng);
        CHECK(is_fully_labeled(g, find_fully_labeled(g, lab, SearchStrategy::path), lab));
        CHECK(is_fully_labeled(g, find_fully_labeled(g, lab, SearchStrategy::exhaustive), lab));
    }
}

TEST_CASE("n=1 agrees with a sign-change scan", "[sperner]")
{
    std::mt19937_64 rng(4);
    for (int m = 1; m <= 20; ++m)
    {
        const SubdivisionGrid g(1, m);
        for (int k = 0; k < 20; ++k)
        {
            const Labeling lab = testing_support::random_admissible(g, rng);
            CHECK(static_cast<int>(count_fully_labeled(g, lab)) == sign_changes(g, lab));
        }
    }
}

TEST_CASE("the path strategy works on implicit grids", "[sperner]")
{
    // Standard labeling of the rotation on a grid too large to materialize.
    const MapSpec f = MapSpec::rotate(3);
    const int m = 400;
    const auto res = door_path(3, m, [&](const std::vector<int>& a) {
        return standard_label(a, m, f(lattice_point(a, m)));
    });
    std::vector<int> labels = res.labels;
    std::sort(labels.begin(), labels.end());
    CHECK(labels == std::vector<int>{0, 1, 2, 3});
    CHECK(res.cells_visited <= cell_count(3, m));
}

TEST_CASE("inadmissible labelings exhaust the search", "[sperner]")
{
    const SubdivisionGrid g(2, 2);
    const Labeling all_zero(2, 2, std::vector<int>(6, 0));
    CHECK(count_fully_labeled(g, all_zero) == 0);
    CHECK_THROWS_AS(find_fully_labeled(g, all_zero, SearchStrategy::exhaustive), SearchExhausted);
    CHECK_THROWS_AS(find_fully_labeled(g, all_zero, SearchStrategy::path), SearchExhausted);
}

TEST_CASE("sperner JSON", "[sperner]")
{
    const SubdivisionGrid g(2, 2);
    std::mt19937_64 rng(1);
    const Labeling lab = testing_support::random_admissible(g, rng);
    const auto c = find_fully_labeled(g, lab);
    const Json j = sperner_to_json(count_fully_labeled(g, lab), g.cell(c));
    CHECK(j["count"].get<int>() % 2 == 1);
    CHECK(j["firstCell"].size() == 3);
}
