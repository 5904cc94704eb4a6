#pragma once

#include <random>
#include <vector>

#include "fixsim/fixsim.hpp"

namespace testing_support {

// Uniform pick among the admissible labels of every vertex: the support
// indices on the boundary, any label inside.
inline fixsim::Labeling random_admissible(const fixsim::SubdivisionGrid& grid, std::mt19937_64& rng)
{
    const int n = grid.dimension();
    std::vector<int> labels(grid.vertex_count());
    for (std::size_t v = 0; v < grid.vertex_count(); ++v)
    {
        const auto a = grid.vertex(v);
        std::vector<int> support;
        for (int i = 0; i <= n; ++i)
            if (a[i] > 0)
                support.push_back(i);
        if (static_cast<int>(support.size()) == n + 1)
        {
            support.clear();
            for (int i = 0; i <= n; ++i)
                support.push_back(i);
        }
        labels[v] = support[std::uniform_int_distribution<std::size_t>(0, support.size() - 1)(rng)];
    }
    return fixsim::Labeling(n, grid.subdivisions(), std::move(labels));
}

// Every admissible labeling of the grid, in odometer order.
template <class Visit>
void for_each_admissible(const fixsim::SubdivisionGrid& grid, Visit&& visit)
{
    const int n = grid.dimension();
    std::vector<std::vector<int>> choices(grid.vertex_count());
    for (std::size_t v = 0; v < grid.vertex_count(); ++v)
    {
        const auto a = grid.vertex(v);
        int positive = 0;
        for (int i = 0; i <= n; ++i)
            positive += a[i] > 0;
        for (int i = 0; i <= n; ++i)
            if (a[i] > 0 || positive == n + 1)
                choices[v].push_back(i);
    }
    std::vector<std::size_t> digit(grid.vertex_count(), 0);
    while (true)
    {
        std::vector<int> labels(grid.vertex_count());
        for (std::size_t v = 0; v < labels.size(); ++v)
            labels[v] = choices[v][digit[v]];
        visit(fixsim::Labeling(n, grid.subdivisions(), std::move(labels)));
        std::size_t v = 0;
        while (v < digit.size() && ++digit[v] == choices[v].size())
            digit[v++] = 0;
        if (v == digit.size())
            return;
    }
}

inline std::vector<double> random_simplex_point(int n, std::mt19937_64& rng)
{
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(n + 1);
    double s = 0;
    for (double& c : p)
        s += (c = e(rng));
    for (double& c : p)
        c /= s;
    return p;
}

// Random expression tree over x0..xn.
inline fixsim::ExprPtr random_expr(int n, int depth, std::mt19937_64& rng)
{
    using fixsim::Expr;
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
    std::uniform_real_distribution<double> value(0.0, 3.0);
    auto sub = [&] { return random_expr(n, depth - 1, rng); };
    switch (pick(rng))
    {
        case 0: return Expr::number(value(rng));
        case 1: return Expr::variable(std::uniform_int_distribution<int>(0, n)(rng));
        case 2: return Expr::unary(Expr::Kind::negate, sub());
        case 3: return Expr::binary(Expr::Kind::add, sub(), sub());
        case 4: return Expr::binary(Expr::Kind::subtract, sub(), sub());
        case 5: return Expr::binary(Expr::Kind::multiply, sub(), sub());
        case 6: return Expr::binary(Expr::Kind::divide, sub(), Expr::binary(Expr::Kind::add, Expr::number(0.5), sub()));
        case 7: return Expr::power(sub(), std::uniform_int_distribution<int>(-2, 4)(rng));
        default:
        {
            std::vector<fixsim::ExprPtr> args;
            const int k = std::uniform_int_distribution<int>(2, 3)(rng);
            for (int i = 0; i < k; ++i)
                args.push_back(sub());
            return Expr::call(pick(rng) % 2 ? Expr::Kind::min : Expr::Kind::max, std::move(args));
        }
    }
}

}   // namespace testing_support
