#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fixsim/construction.hpp"
#include "fixsim/errors.hpp"
#include "fixsim/fixed_point.hpp"
#include "fixsim/labeling.hpp"
#include "fixsim/simplex_core.hpp"

namespace fixsim {

using Json = nlohmann::ordered_json;

inline Json grid_to_json(const SubdivisionGrid& grid)
{
    Json vertices = Json::array();
    for (std::size_t v = 0; v < grid.vertex_count(); ++v)
    {
        const auto c = grid.vertex(v);
        vertices.push_back(std::vector<int>(c.begin(), c.end()));
    }
    Json cells = Json::array();
    for (std::size_t c = 0; c < grid.cell_count(); ++c)
    {
        const auto vs = grid.cell(c);
        cells.push_back(std::vector<std::uint32_t>(vs.begin(), vs.end()));
    }
    return Json{{"n", grid.dimension()}, {"m", grid.subdivisions()}, {"vertices", vertices}, {"cells", cells}};
}

inline Json labeling_to_json(const SubdivisionGrid& grid, const Labeling& lab)
{
    Json labels = Json::array();
    for (std::size_t v = 0; v < grid.vertex_count(); ++v)
    {
        const auto c = grid.vertex(v);
        labels.push_back(Json{{"v", std::vector<int>(c.begin(), c.end())}, {"l", lab[v]}});
    }
    return Json{{"n", grid.dimension()}, {"m", grid.subdivisions()}, {"labels", labels}};
}

namespace detail {

inline int json_int(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_number_integer())
        throw InvalidInput(std::string("JSON field '") + key + "' must be an integer");
    return j.at(key).get<int>();
}

}   // namespace detail

/** Reads Labeling JSON; every lattice vertex must be listed exactly once. */
inline Labeling labeling_from_json(const Json& j)
{
    const int n = detail::json_int(j, "n");
    const int m = detail::json_int(j, "m");
    if (n < 1 || m < 1)
        throw InvalidInput("labeling needs n >= 1 and m >= 1");
    if (!j.contains("labels") || !j.at("labels").is_array())
        throw InvalidInput("JSON field 'labels' must be an array");
    const auto count = lattice_vertex_count(n, m);
    if (count == kSaturated || count > (1ULL << 28))
        throw ResourceLimit("labeling grid is too large");

    std::vector<int> labels(count, -1);
    for (const auto& entry : j.at("labels"))
    {
        const int l = detail::json_int(entry, "l");
        if (!entry.contains("v") || !entry.at("v").is_array())
            throw InvalidInput("labeling entry without a 'v' array");
        std::vector<int> v;
        for (const auto& c : entry.at("v"))
        {
            if (!c.is_number_integer())
                throw InvalidInput("vertex coordinates must be integers");
            v.push_back(c.get<int>());
        }
        int sum = 0;
        bool nonneg = v.size() == static_cast<std::size_t>(n) + 1;
        for (int c : v)
        {
            nonneg = nonneg && c >= 0;
            sum += c;
        }
        if (!nonneg || sum != m)
            throw InvalidInput("labeling entry " + entry.at("v").dump() + " is not a lattice point of the "
                               + std::to_string(m) + "-fold grid");
        auto& slot = labels[static_cast<std::size_t>(vertex_rank(v, m))];
        if (slot != -1)
            throw InvalidInput("vertex " + entry.at("v").dump() + " is labeled twice");
        slot = l;
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == -1)
            throw InvalidInput("labeling misses " + std::to_string(count - i) + " or fewer vertices");
    return Labeling(n, m, std::move(labels));
}

inline Json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot read '" + path + "'");
    try
    {
        return Json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline Labeling read_labeling_file(const std::string& path) { return labeling_from_json(read_json_file(path)); }

inline Json violations_to_json(const std::vector<Violation>& violations)
{
    Json out = Json::array();
    for (const auto& v : violations)
        out.push_back(Json{{"vertex", v.vertex}, {"v", v.coords}, {"l", v.label}, {"rule", v.rule}});
    return out;
}

inline Json sperner_to_json(std::uint64_t count, std::span<const std::uint32_t> first_cell)
{
    return Json{{"count", count}, {"firstCell", std::vector<std::uint32_t>(first_cell.begin(), first_cell.end())}};
}

inline Json result_to_json(const FixedPointResult& r)
{
    Json trace = Json::array();
    for (const auto& t : r.trace)
        trace.push_back(Json{{"level", t.level},
                             {"eps", t.eps},
                             {"m", t.m},
                             {"radius", t.radius},
                             {"point", t.point},
                             {"residual", t.residual}});
    Json witness = nullptr;
    if (r.witness)
        witness = Json{{"x", r.witness->x},
                       {"y", r.witness->y},
                       {"residualX", r.witness->residual_x},
                       {"residualY", r.witness->residual_y},
                       {"distance", r.witness->distance},
                       {"eps", r.witness->eps},
                       {"delta", r.witness->delta}};
    return Json{{"status", to_string(r.status)},
                {"point", std::vector<double>(r.point.begin(), r.point.end())},
                {"residual", r.residual},
                {"heuristicModulus", r.heuristic_modulus},
                {"trace", trace},
                {"witness", witness}};
}

inline Json fractions_to_json(const BarycentricPoint<Rational>& p)
{
    Json out = Json::array();
    for (const auto& c : p)
        out.push_back(to_fraction_string(c));
    return out;
}

inline Json converse_to_json(const SubdivisionGrid& grid, const RoundTripReport& r)
{
    const auto cell = grid.cell(r.exact.cell);
    const auto fcell = grid.cell(r.floating_cell);
    return Json{{"tau", to_fraction_string(r.tau)},
                {"fixedPoint", fractions_to_json(r.exact.point)},
                {"cell", std::vector<std::uint32_t>(cell.begin(), cell.end())},
                {"exact", true},
                {"roundTrip",
                 Json{{"status", to_string(r.floating.status)},
                      {"point", std::vector<double>(r.floating.point.begin(), r.floating.point.end())},
                      {"residual", r.floating.residual},
                      {"cell", std::vector<std::uint32_t>(fcell.begin(), fcell.end())},
                      {"sameCell", r.same_cell},
                      {"distanceToBarycenter", r.distance_to_barycenter}}}};
}

}   // namespace fixsim
