#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rite/case_runner.hpp"
#include "rite/cases.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json default_profiles(rite::BuiltinCase kind, int n) {
    const int samples = 4 * n + 1;
    if (kind == rite::BuiltinCase::Cube)
        return json::array({
            {{"name", "q_top_x"}, {"quantity", "q"}, {"start", {0, 0.5, 1}}, {"end", {1, 0.5, 1}}, {"samples", samples}},
            {{"name", "q_side_z"}, {"quantity", "q"}, {"start", {0, 0.5, 0}}, {"end", {0, 0.5, 1}}, {"samples", samples}},
            {{"name", "G_mid_x"}, {"quantity", "G"}, {"start", {0, 0.5, 0.5}}, {"end", {1, 0.5, 0.5}}, {"samples", samples}},
        });
    return json::array({
        {{"name", "q_AA"}, {"quantity", "q"}, {"start", {0.5, 0, 0}}, {"end", {0.5, 3, 0}}, {"samples", 3 * samples}},
        {{"name", "q_across"}, {"quantity", "q"}, {"start", {0, 1.5, 0}}, {"end", {1, 1.5, 0}}, {"samples", samples}},
        {{"name", "G_leg"}, {"quantity", "G"}, {"start", {0.5, 0, 0.5}}, {"end", {0.5, 3, 0.5}}, {"samples", 3 * samples}},
    });
}

json default_config(rite::BuiltinCase kind, int n) {
    const bool cube = kind == rite::BuiltinCase::Cube;
    return {{"mesh", "mesh.json"},
            {"properties", {{"sigma_a", cube ? 0.0 : 0.5}, {"sigma_s", cube ? 1.0 : 0.0}}},
            {"solver", {{"tolerance", 1e-8}, {"max_iterations", 200}}},
            {"visibility", {{"min_subdivision_area", 1e-4}, {"max_depth", 8}, {"culls", true}}},
            {"quadrature", {{"min_order", 2}, {"max_order", 16}, {"tolerance", 1e-2}, {"near_levels", 6}}},
            {"output_dir", "out"},
            {"reference_temperature", 1000.0},
            {"profiles", default_profiles(kind, n)},
            {"threads", 0},
            {"seed", rite::kDefaultSeed}};
}

struct Overrides {
    std::string out;
    double min_area = -1.0;
    int quad_order = -1;
    double tol = -1.0;
    int max_iter = -1;
    int threads = -1;
    std::int64_t seed = -1;
};

void apply(rite::CaseConfig& c, const Overrides& o) {
    if (!o.out.empty())
        c.output_dir = o.out;
    if (o.min_area > 0.0)
        c.visibility.budget.min_area_fraction = o.min_area;
    if (o.quad_order > 0) {
        c.quadrature.min_order = o.quad_order;
        c.quadrature.max_order = std::max(c.quadrature.max_order, c.quadrature.min_order);
    }
    if (o.tol > 0.0)
        c.solver.tolerance = o.tol;
    if (o.max_iter > 0)
        c.solver.max_iterations = o.max_iter;
    if (o.threads >= 0)
        c.threads = o.threads;
    if (o.seed >= 0)
        c.seed = static_cast<std::uint64_t>(o.seed);
    c.visibility.budget.validate();
    c.quadrature.validate();
    c.solver.validate();
}

void add_overrides(CLI::App* app, Overrides& o) {
    app->add_option("--out", o.out, "Output directory");
    app->add_option("--min-subdiv-area", o.min_area, "Smallest sub-element area relative to its element")
        ->check(CLI::PositiveNumber);
    app->add_option("--quad-order", o.quad_order, "Fewest Gauss points per direction on any patch")->check(CLI::Range(1, 16));
    app->add_option("--tol", o.tol, "Outer tolerance on the relative change of G")->check(CLI::PositiveNumber);
    app->add_option("--max-iter", o.max_iter, "Outer iteration budget")->check(CLI::PositiveNumber);
    app->add_option("--threads", o.threads, "Assembly threads (0: all cores)")->check(CLI::NonNegativeNumber);
    app->add_option("--seed", o.seed, "Oracle sampling seed")->check(CLI::NonNegativeNumber);
}

int validate_suite(const rite::Enclosure& enc, const rite::AssemblyOptions& aopt, std::uint64_t seed,
                   const fs::path& out_dir) {
    using namespace rite;
    std::vector<OracleReport> reports;
    const CollocationSet colloc = collocation_points(enc.mesh, enc.grid);
    if (colloc.boundary_count() > 0) {
        const auto& b = colloc.boundary.front();
        reports.push_back(lemma1_identity(enc.mesh, {b.point, b.normal}, 0.01, aopt));
    }
    if (colloc.interior_count() > 0) {
        const Point3 c = colloc.interior[static_cast<std::size_t>(colloc.interior_count() / 2)];
        reports.push_back(lemma3_interior_identity(enc.mesh, c, 0.0, 0.01, aopt));
        reports.push_back(lemma3_interior_identity(enc.mesh, colloc.interior.front(), 0.0, 0.01, aopt));
        reports.back().check = "lemma3_interior_identity_offcentre";
    }
    // visibility of every active element from the first boundary point against the ray oracle
    if (colloc.boundary_count() > 0) {
        const auto& b = colloc.boundary.front();
        const Source src{b.point, b.normal};
        double worst = 0.0;
        int count = 0;
        for (int k : build_active_list(src, enc.mesh).elements) {
            const double f = element_visibility(src, k, enc.mesh, aopt.visibility).fraction;
            worst = std::max(worst, std::abs(f - visibility_oracle(src.point, k, enc.mesh, 10000, seed)));
            ++count;
        }
        OracleReport r;
        r.check = "visibility_vs_ray_oracle";
        r.computed = worst;
        r.abs_deviation = worst;
        r.rel_deviation = worst;
        r.tolerance = 0.02;
        r.pass = worst <= 0.02;
        r.resolution = "active=" + std::to_string(count) + " rays=10000";
        reports.push_back(r);
    }
    write_reports_table(std::cout, reports);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream csv(out_dir / "validation_report.csv");
        write_reports_csv(csv, reports);
    }
    return std::all_of(reports.begin(), reports.end(), [](const OracleReport& r) { return r.pass; }) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radiative integral transfer equation solver for gray diffuse enclosures"};
    app.require_subcommand(1);

    std::string kind_name;
    int resolution = 4;
    std::string gen_out = ".";
    auto* gen = app.add_subcommand("generate", "Write a builtin case (mesh.json + config.json)");
    gen->add_option("case", kind_name, "CUBE or LSHAPE")->required();
    gen->add_option("resolution", resolution, "Elements per metre along each edge")->check(CLI::PositiveNumber);
    gen->add_option("--out", gen_out, "Directory for the case files");

    std::string config_path;
    Overrides run_over;
    bool dump_matrices = false, dump_visibility = false;
    auto* run = app.add_subcommand("run", "Assemble, solve and validate a case");
    run->add_option("--config", config_path, "Case config JSON")->required()->check(CLI::ExistingFile);
    add_overrides(run, run_over);
    run->add_flag("--dump-matrices", dump_matrices, "Write the assembled blocks as binary files");
    run->add_flag("--dump-visibility", dump_visibility, "Write per-pair visibility fractions");

    std::string val_config;
    Overrides val_over;
    std::string val_case = "CUBE";
    int val_res = 8;
    auto* val = app.add_subcommand("validate", "Run the oracle suite on a case mesh or a builtin case");
    val->add_option("--config", val_config, "Case config JSON (default: builtin case)")->check(CLI::ExistingFile);
    val->add_option("--case", val_case, "Builtin case when no config is given");
    val->add_option("--resolution", val_res, "Builtin case resolution")->check(CLI::PositiveNumber);
    add_overrides(val, val_over);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const auto kind = rite::parse_builtin_case(kind_name);
            const fs::path dir = gen_out;
            fs::create_directories(dir);
            const rite::Enclosure enc = rite::generate_case(kind, resolution);
            rite::save_enclosure(dir / "mesh.json", enc);
            std::ofstream(dir / "config.json") << default_config(kind, resolution).dump(2) << '\n';
            std::cout << rite::to_string(kind) << " resolution " << resolution << ": " << enc.mesh.size()
                      << " elements, " << enc.grid.cell_count() << " cells -> " << dir.string() << '\n';
            return 0;
        }
        if (*run) {
            rite::CaseConfig cfg = rite::load_case_config(config_path);
            apply(cfg, run_over);
            const auto res = rite::run_case(cfg, {dump_matrices, dump_visibility});
            rite::write_reports_table(std::cout, res.reports);
            std::cout << "converged: " << (res.solution.converged ? "yes" : "no") << " after "
                      << res.solution.iterations << " iterations\n";
            return res.exit_code;
        }
        rite::AssemblyOptions aopt;
        std::uint64_t seed = rite::kDefaultSeed;
        fs::path out_dir = val_over.out;
        rite::Enclosure enc;
        if (!val_config.empty()) {
            rite::CaseConfig cfg = rite::load_case_config(val_config);
            apply(cfg, val_over);
            enc = rite::load_enclosure(cfg.mesh);
            aopt.visibility = cfg.visibility;
            aopt.quadrature = cfg.quadrature;
            seed = cfg.seed;
        } else {
            enc = rite::generate_case(rite::parse_builtin_case(val_case), val_res);
            if (val_over.min_area > 0.0)
                aopt.visibility.budget.min_area_fraction = val_over.min_area;
            if (val_over.quad_order > 0)
                aopt.quadrature.min_order = val_over.quad_order;
            if (val_over.seed >= 0)
                seed = static_cast<std::uint64_t>(val_over.seed);
        }
        return validate_suite(enc, aopt, seed, out_dir);
    } catch (const rite::Error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    }
}
