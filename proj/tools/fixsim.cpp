// fixsim command line: grids, labelings, Sperner search, fixed points,
// the converse construction and SVG pictures.  JSON goes to stdout (or
// --out), diagnostics to stderr.
//
// Exit codes: 0 success, 1 internal failure, 2 invalid input,
// 3 non-contraction witness, 4 resource limit.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fixsim/fixsim.hpp"

namespace {

using namespace fixsim;

enum ExitCode
{
    kOk = 0,
    kFailure = 1,
    kInvalid = 2,
    kWitness = 3,
    kResource = 4,
};

void emit(const std::string& out, const std::string& text)
{
    if (out.empty() || out == "-")
    {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f)
        throw InvalidInput("cannot write '" + out + "'");
    f << text;
}

void emit(const std::string& out, const Json& j) { emit(out, j.dump(2) + "\n"); }

SearchStrategy parse_strategy(const std::string& s)
{
    if (s == "exhaustive")
        return SearchStrategy::exhaustive;
    if (s == "path")
        return SearchStrategy::path;
    return SearchStrategy::automatic;
}

struct MapArgs
{
    std::string text;
    std::string file;

    void add_to(CLI::App* cmd)
    {
        cmd->add_option("--map", text, "map definition (builtin or g0=...; g1=...)");
        cmd->add_option("--map-file", file, "file holding a map definition");
    }

    MapSpec load(int n) const
    {
        if (!text.empty() && !file.empty())
            throw InvalidInput("give either --map or --map-file, not both");
        if (!file.empty())
            return read_map_file(file, n);
        if (text.empty())
            throw InvalidInput("a map is required (--map or --map-file)");
        return parse_map(text, n);
    }
};

ModulusOfContinuity parse_modulus_table(const std::string& text)
{
    // "eps:delta,eps:delta,..."
    std::vector<std::pair<double, double>> pairs;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');)
    {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw InvalidInput("modulus entry '" + item + "' is not eps:delta");
        try
        {
            pairs.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        }
        catch (const std::logic_error&)
        {
            throw InvalidInput("modulus entry '" + item + "' is not numeric");
        }
    }
    return ModulusOfContinuity::table(std::move(pairs));
}

int run(int argc, char** argv)
{
    CLI::App app{"Sperner labelings and approximate fixed points on the simplex"};
    app.require_subcommand(1);

    std::string out;
    unsigned threads = 1;
    bool rational = false;
    auto common = [&](CLI::App* cmd) {
        cmd->add_option("--out,-o", out, "output file (default stdout)");
        cmd->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
        cmd->add_flag("--rational", rational, "exact rational arithmetic where supported");
    };

    int n = 2;
    int m = 4;

    auto* grid_cmd = app.add_subcommand("grid", "emit the m-fold subdivision as JSON");
    grid_cmd->add_option("--n", n, "dimension")->required()->check(CLI::PositiveNumber);
    grid_cmd->add_option("--m", m, "subdivisions per side")->required()->check(CLI::PositiveNumber);
    common(grid_cmd);

    MapArgs label_map;
    auto* label_cmd = app.add_subcommand("label", "standard labeling induced by a map");
    label_cmd->add_option("--n", n, "dimension")->required()->check(CLI::PositiveNumber);
    label_cmd->add_option("--m", m, "subdivisions per side")->required()->check(CLI::PositiveNumber);
    label_map.add_to(label_cmd);
    common(label_cmd);

    MapArgs sperner_map;
    std::string sperner_labeling;
    std::string strategy = "auto";
    auto* sperner_cmd = app.add_subcommand("sperner", "count fully labeled cells and report one");
    sperner_cmd->add_option("--labeling", sperner_labeling, "labeling JSON file");
    sperner_cmd->add_option("--n", n, "dimension (with --map)")->check(CLI::PositiveNumber);
    sperner_cmd->add_option("--m", m, "subdivisions per side (with --map)")->check(CLI::PositiveNumber);
    sperner_cmd->add_option("--strategy", strategy, "exhaustive, path or auto")
        ->check(CLI::IsMember({"exhaustive", "path", "auto"}));
    sperner_map.add_to(sperner_cmd);
    common(sperner_cmd);

    MapArgs fix_map;
    double tol = 1e-6;
    std::optional<double> lipschitz;
    std::string modulus;
    bool estimate = false;
    std::optional<double> delta_check;
    std::optional<double> witness_floor;
    std::uint64_t seed = 0x5eed;
    auto* fix_cmd = app.add_subcommand("fixpoint", "refined approximate fixed point of a map");
    fix_cmd->add_option("--n", n, "dimension")->required()->check(CLI::PositiveNumber);
    fix_cmd->add_option("--tol", tol, "target residual and step tolerance")->check(CLI::PositiveNumber);
    fix_cmd->add_option("--lipschitz", lipschitz, "Lipschitz constant of the map");
    fix_cmd->add_option("--modulus", modulus, "modulus table eps:delta,eps:delta,...");
    fix_cmd->add_flag("--estimate-modulus", estimate, "estimate the modulus by sampling (heuristic)");
    fix_cmd->add_option("--delta-check", delta_check, "witness separation (default 10*tol)");
    fix_cmd->add_option("--witness-floor", witness_floor, "eps below which witnesses are sought");
    fix_cmd->add_option("--strategy", strategy, "exhaustive, path or auto")
        ->check(CLI::IsMember({"exhaustive", "path", "auto"}));
    fix_cmd->add_option("--seed", seed, "sampling seed");
    fix_map.add_to(fix_cmd);
    common(fix_cmd);

    std::string converse_labeling;
    std::string tau_text;
    auto* converse_cmd = app.add_subcommand("converse", "fixed point of the map built from a labeling");
    converse_cmd->add_option("--labeling", converse_labeling, "labeling JSON file")->required();
    converse_cmd->add_option("--tau", tau_text, "perturbation p/q (default half the admissible bound)");
    converse_cmd->add_option("--tol", tol, "tolerance of the floating point cross-check")
        ->check(CLI::PositiveNumber);
    common(converse_cmd);

    std::string render_input;
    auto* render_cmd = app.add_subcommand("render", "SVG picture of a 2-dimensional grid or labeling");
    render_cmd->add_option("--input,input", render_input, "grid or labeling JSON file")->required();
    common(render_cmd);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::Success& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return kInvalid;
    }

    if (*grid_cmd)
    {
        const SubdivisionGrid grid(n, m);
        emit(out, grid_to_json(grid));
        std::cerr << "grid: n=" << n << " m=" << m << ", " << grid.cell_count() << " cells, "
                  << grid.vertex_count() << " vertices\n";
        return kOk;
    }

    if (*label_cmd)
    {
        const MapSpec f = label_map.load(n);
        const SubdivisionGrid grid(n, m);
        const Labeling lab = label_from_function(grid, f, threads);
        emit(out, labeling_to_json(grid, lab));
        return kOk;
    }

    if (*sperner_cmd)
    {
        std::optional<Labeling> lab;
        if (!sperner_labeling.empty())
        {
            if (!sperner_map.text.empty() || !sperner_map.file.empty())
                throw InvalidInput("give either --labeling or a map, not both");
            lab = read_labeling_file(sperner_labeling);
        }
        const int dn = lab ? lab->dimension() : n;
        const int dm = lab ? lab->subdivisions() : m;
        const SubdivisionGrid grid(dn, dm);
        if (!lab)
            lab = label_from_function(grid, sperner_map.load(dn), threads);
        const auto violations = check_admissible(grid, *lab);
        if (!violations.empty())
        {
            emit(out, Json{{"violations", violations_to_json(violations)}});
            throw InadmissibleLabeling(std::to_string(violations.size()) + " labeling violation(s)");
        }
        const std::uint64_t count = count_fully_labeled(grid, *lab, threads);
        const std::size_t cell = find_fully_labeled(grid, *lab, parse_strategy(strategy));
        emit(out, sperner_to_json(count, grid.cell(cell)));
        std::cerr << "sperner: " << count << " fully labeled cell(s)\n";
        return kOk;
    }

    if (*fix_cmd)
    {
        const MapSpec f = fix_map.load(n);
        if (rational && f.kind() != MapSpec::Kind::constructed)
            throw InvalidInput("--rational needs a constructed map");
        std::optional<ModulusOfContinuity> w;
        if (lipschitz)
            w = ModulusOfContinuity::lipschitz(*lipschitz);
        if (!modulus.empty())
        {
            if (w)
                throw InvalidInput("give either --lipschitz or --modulus, not both");
            w = parse_modulus_table(modulus);
        }
        if (!w && estimate)
        {
            w = estimate_modulus(f, n, 4000, seed);
            std::cerr << "fixpoint: modulus estimated by sampling; the result is heuristic\n";
        }
        if (!w && f.declared_lipschitz())
            w = ModulusOfContinuity::lipschitz(*f.declared_lipschitz());
        if (!w)
            throw InvalidInput("expression maps need --lipschitz, --modulus or --estimate-modulus");

        RefineOptions opt;
        opt.delta_check = delta_check;
        opt.witness_floor = witness_floor;
        opt.seed = seed;
        opt.solver.strategy = parse_strategy(strategy);
        opt.solver.threads = threads;
        const FixedPointResult r = refine_fixed_point(f, n, tol, *w, opt);
        Json j = result_to_json(r);
        if (rational)
        {
            const auto exact = fixed_point_of_construction(*f.vertex_map());
            j["exactPoint"] = fractions_to_json(exact.point);
        }
        emit(out, j);
        std::cerr << "fixpoint: " << to_string(r.status) << ", residual " << r.residual << " after "
                  << r.trace.size() << " levels\n";
        return r.status == FixedPointStatus::converged ? kOk : kWitness;
    }

    if (*converse_cmd)
    {
        const Labeling lab = read_labeling_file(converse_labeling);
        auto grid = std::make_shared<const SubdivisionGrid>(lab.dimension(), lab.subdivisions());
        const auto violations = check_admissible(*grid, lab);
        if (!violations.empty())
        {
            emit(out, Json{{"violations", violations_to_json(violations)}});
            for (const auto& v : violations)
            {
                std::cerr << "violation: vertex (";
                for (std::size_t i = 0; i < v.coords.size(); ++i)
                    std::cerr << (i ? "," : "") << v.coords[i];
                std::cerr << ") label " << v.label << ": " << v.rule << "\n";
            }
            throw InadmissibleLabeling(std::to_string(violations.size()) + " labeling violation(s)");
        }
        std::optional<Rational> tau;
        if (!tau_text.empty())
            tau = parse_rational(tau_text);
        RefineOptions opt;
        opt.solver.threads = threads;
        const auto report = roundtrip_check(grid, lab, tau, tol, opt);
        emit(out, converse_to_json(*grid, report));
        std::cerr << "converse: tau " << to_fraction_string(report.tau) << ", exact fixed point in cell "
                  << report.exact.cell << "\n";
        return kOk;
    }

    if (*render_cmd)
    {
        const Json j = read_json_file(render_input);
        std::optional<Labeling> lab;
        int rn = 0;
        int rm = 0;
        if (j.contains("labels"))
        {
            lab = labeling_from_json(j);
            rn = lab->dimension();
            rm = lab->subdivisions();
        }
        else
        {
            rn = detail::json_int(j, "n");
            rm = detail::json_int(j, "m");
        }
        if (rn != 2)
            throw UnsupportedDimension("rendering needs n = 2, got n = " + std::to_string(rn));
        const SubdivisionGrid grid(rn, rm);
        emit(out, render_svg(grid, lab ? &*lab : nullptr));
        return kOk;
    }
    return kInvalid;
}

}   // namespace

int main(int argc, char** argv)
{
    try
    {
        return run(argc, argv);
    }
    catch (const fixsim::SyntaxError& e)
    {
        std::cerr << "error: syntax: " << e.what() << "\n";
        return kInvalid;
    }
    catch (const fixsim::InvalidInput& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
    catch (const fixsim::MapRangeError& e)
    {
        std::cerr << "error: map output: " << e.what() << "\n";
        return kInvalid;
    }
    catch (const fixsim::SearchExhausted& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
    catch (const fixsim::ResourceLimit& e)
    {
        std::cerr << "error: resource limit: " << e.what() << "\n";
        return kResource;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
