#include "rite/case_runner.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

namespace rite {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Point3 point_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError(std::string(what) + " must be a 3-component array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

fs::path resolve(const fs::path& p, const fs::path& base) {
    if (p.empty() || p.is_absolute() || base.empty())
        return p;
    return base / p;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

Eigen::VectorXd medium_emission(const Enclosure& enc, const CollocationSet& colloc, double sigma) {
    Eigen::VectorXd e(colloc.interior_count());
    const auto& temp = enc.grid.temperature();
    for (int j = 0; j < colloc.interior_count(); ++j) {
        const auto cell = static_cast<std::size_t>(colloc.medium_cells[static_cast<std::size_t>(j)]);
        e(j) = 4.0 * blackbody(cell < temp.size() ? temp[cell] : 0.0, sigma).emissive_power;
    }
    return e;
}

OracleReport informational(std::string check, double computed, double reference, bool pass, std::string res) {
    OracleReport r;
    r.check = std::move(check);
    r.computed = computed;
    r.reference = reference;
    r.abs_deviation = std::abs(computed - reference);
    r.rel_deviation = reference != 0.0 ? r.abs_deviation / std::abs(reference) : r.abs_deviation;
    r.pass = pass;
    r.resolution = std::move(res);
    return r;
}

} // namespace

CaseConfig parse_case_config(const json& doc, const fs::path& base_dir) {
    CaseConfig c;
    try {
        if (!doc.is_object())
            throw ConfigError("case config must be a JSON object");
        if (!doc.contains("mesh"))
            throw ConfigError("case config needs a \"mesh\" path");
        c.mesh = resolve(doc.at("mesh").get<std::string>(), base_dir);
        if (!fs::exists(c.mesh))
            throw ConfigError("mesh file does not exist: " + c.mesh.string());
        if (doc.contains("grid"))
            c.grid = doc.at("grid");
        if (doc.contains("properties")) {
            const auto& p = doc.at("properties");
            c.properties.sigma_a = p.value("sigma_a", 0.0);
            c.properties.sigma_s = p.value("sigma_s", 0.0);
            c.properties.stefan_boltzmann = p.value("stefan_boltzmann", kStefanBoltzmann);
        }
        if (doc.contains("solver")) {
            const auto& s = doc.at("solver");
            c.solver.tolerance = s.value("tolerance", c.solver.tolerance);
            c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
        }
        if (doc.contains("visibility")) {
            const auto& v = doc.at("visibility");
            c.visibility.budget.min_area_fraction = v.value("min_subdivision_area", c.visibility.budget.min_area_fraction);
            c.visibility.budget.max_depth = v.value("max_depth", c.visibility.budget.max_depth);
            c.visibility.culls = v.value("culls", c.visibility.culls);
        }
        if (doc.contains("quadrature")) {
            const auto& q = doc.at("quadrature");
            c.quadrature.min_order = q.value("min_order", c.quadrature.min_order);
            c.quadrature.max_order = q.value("max_order", c.quadrature.max_order);
            c.quadrature.tolerance = q.value("tolerance", c.quadrature.tolerance);
            c.quadrature.near_levels = q.value("near_levels", c.quadrature.near_levels);
            c.quadrature.max_tolerance = q.value("max_tolerance", c.quadrature.max_tolerance);
        }
        c.output_dir = resolve(doc.value("output_dir", std::string("out")), base_dir);
        c.reference_temperature = doc.value("reference_temperature", 0.0);
        c.threads = doc.value("threads", 0);
        c.seed = doc.value("seed", kDefaultSeed);
        c.energy_tolerance = doc.value("energy_tolerance", c.energy_tolerance);
        c.row_sum_tolerance = doc.value("row_sum_tolerance", c.row_sum_tolerance);
        if (doc.contains("profiles"))
            for (const auto& p : doc.at("profiles")) {
                ProfileSpec spec;
                spec.name = p.at("name").get<std::string>();
                const std::string q = p.value("quantity", std::string("q"));
                if (q == "q")
                    spec.quantity = ProfileQuantity::Q;
                else if (q == "G")
                    spec.quantity = ProfileQuantity::G;
                else
                    throw ConfigError("profile quantity must be \"q\" or \"G\"");
                spec.start = point_from(p.at("start"), "profile start");
                spec.end = point_from(p.at("end"), "profile end");
                spec.samples = p.value("samples", 2);
                if (spec.samples < 2)
                    throw ConfigError("profile '" + spec.name + "' needs at least 2 samples");
                c.profiles.push_back(spec);
            }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed case config: ") + ex.what());
    }
    c.properties.validate(false);
    c.solver.validate();
    c.visibility.budget.validate();
    c.quadrature.validate();
    if (c.threads < 0)
        throw ConfigError("threads must be non-negative");
    return c;
}

CaseConfig load_case_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& ex) {
        throw ConfigError("cannot parse " + path.string() + ": " + ex.what());
    }
    return parse_case_config(doc, path.parent_path());
}

json case_config_to_json(const CaseConfig& c) {
    json doc;
    doc["mesh"] = fs::absolute(c.mesh).lexically_normal().string();
    if (c.grid)
        doc["grid"] = *c.grid;
    doc["properties"] = {{"sigma_a", c.properties.sigma_a},
                         {"sigma_s", c.properties.sigma_s},
                         {"stefan_boltzmann", c.properties.stefan_boltzmann}};
    doc["solver"] = {{"tolerance", c.solver.tolerance}, {"max_iterations", c.solver.max_iterations}};
    doc["visibility"] = {{"min_subdivision_area", c.visibility.budget.min_area_fraction},
                         {"max_depth", c.visibility.budget.max_depth},
                         {"culls", c.visibility.culls}};
    doc["quadrature"] = {{"min_order", c.quadrature.min_order},
                         {"max_order", c.quadrature.max_order},
                         {"tolerance", c.quadrature.tolerance},
                         {"max_tolerance", c.quadrature.max_tolerance},
                         {"near_levels", c.quadrature.near_levels}};
    doc["output_dir"] = fs::absolute(c.output_dir).lexically_normal().string();
    doc["reference_temperature"] = c.reference_temperature;
    doc["threads"] = c.threads;
    doc["seed"] = c.seed;
    doc["energy_tolerance"] = c.energy_tolerance;
    doc["row_sum_tolerance"] = c.row_sum_tolerance;
    auto& profiles = doc["profiles"] = json::array();
    for (const auto& p : c.profiles)
        profiles.push_back({{"name", p.name},
                            {"quantity", p.quantity == ProfileQuantity::Q ? "q" : "G"},
                            {"start", {p.start.x(), p.start.y(), p.start.z()}},
                            {"end", {p.end.x(), p.end.y(), p.end.z()}},
                            {"samples", p.samples}});
    return doc;
}

std::vector<ProfileSample> sample_profile(const SolutionState& solution, const Enclosure& enc,
                                          const CollocationSet& colloc, const ProfileSpec& spec) {
    std::vector<ProfileSample> out;
    const double length = (spec.end - spec.start).norm();
    const double tol = 1e-6 * enc.mesh.diameter();
    for (int k = 0; k < spec.samples; ++k) {
        const double f = static_cast<double>(k) / (spec.samples - 1);
        const Point3 x = (1.0 - f) * spec.start + f * spec.end;
        double value = 0.0;
        if (spec.quantity == ProfileQuantity::G) {
            int cell = enc.grid.locate(x);
            int m = cell >= 0 ? colloc.cell_to_medium[static_cast<std::size_t>(cell)] : -1;
            if (m < 0) {
                // sample on the medium boundary: nearest medium cell centre within half a cell diagonal
                const double reach = 0.5 * enc.grid.spacing().norm() * (1.0 + 1e-9);
                double best = std::numeric_limits<double>::infinity();
                for (int j = 0; j < colloc.interior_count(); ++j) {
                    const double d = (colloc.interior[static_cast<std::size_t>(j)] - x).norm();
                    if (d < best && d <= reach) {
                        best = d;
                        m = j;
                    }
                }
            }
            if (m < 0)
                throw LineOutsideDomain("profile '" + spec.name + "' leaves the medium");
            value = solution.G(m);
        } else {
            int best_i = -1;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t e = 0; e < enc.mesh.size(); ++e) {
                if (!enc.mesh.element(e).contains(x, tol))
                    continue;
                const int off = colloc.element_offset[e];
                for (int a = 0; a < shape_count(enc.mesh.element(e).shape()); ++a) {
                    const double d = (colloc.boundary[static_cast<std::size_t>(off + a)].point - x).norm();
                    if (d < best) {
                        best = d;
                        best_i = off + a;
                    }
                }
            }
            if (best_i < 0)
                throw LineOutsideDomain("profile '" + spec.name + "' leaves the boundary surface");
            value = solution.q(best_i);
        }
        out.push_back({f * length, x, value});
    }
    return out;
}

void emit_profile(std::ostream& out, const std::vector<ProfileSample>& samples, ProfileQuantity quantity,
                  double reference_temperature, double stefan_boltzmann) {
    const char* name = quantity == ProfileQuantity::Q ? "q" : "G";
    const double scale = reference_temperature > 0.0 ? blackbody(reference_temperature, stefan_boltzmann).emissive_power
                                                     : 0.0;
    out << "s [m],x [m],y [m],z [m]," << name << " [W/m^2]";
    if (scale > 0.0)
        out << ',' << name << "/(sigma*Tref^4) [-]";
    out << '\n' << std::setprecision(17);
    for (const auto& s : samples) {
        out << s.s << ',' << s.x.x() << ',' << s.x.y() << ',' << s.x.z() << ',' << s.value;
        if (scale > 0.0)
            out << ',' << s.value / scale;
        out << '\n';
    }
}

CaseResult run_case(const CaseConfig& config, const RunOptions& options) {
    CaseResult res;
    res.enclosure = load_enclosure(config.mesh);
    auto& enc = res.enclosure;
    if (config.grid) {
        VoxelGrid g = parse_grid(*config.grid);
        if (g.temperature().empty())
            g.temperature() = std::vector<double>(static_cast<std::size_t>(g.cell_count()), 0.0);
        enc.grid = std::move(g);
    }
    RadiativeProperties props = config.properties;
    props.domain_diameter = enc.mesh.diameter();
    props.validate(false);

    fs::create_directories(config.output_dir);
    open_out(config.output_dir / "effective_config.json") << case_config_to_json(config).dump(2) << '\n';

    res.colloc = collocation_points(enc.mesh, enc.grid);
    const auto& colloc = res.colloc;

    AssemblyOptions aopt;
    aopt.visibility = config.visibility;
    aopt.quadrature = config.quadrature;
    aopt.threads = config.threads;
    std::vector<VisibilityRecord> vis;
    std::vector<VisibilityRecord>* vis_ptr = options.dump_visibility ? &vis : nullptr;
    const SurfaceSystem surface = assemble_surface(enc.mesh, enc.grid, props, colloc, aopt, vis_ptr);
    const VolumeSystem volume = assemble_volume(enc.mesh, enc.grid, props, colloc, aopt, vis_ptr);

    if (options.dump_matrices) {
        const fs::path dir = config.output_dir / "matrices";
        fs::create_directories(dir);
        write_block((dir / "Gmat.bin").string(), surface.G);
        write_block((dir / "Fmat.bin").string(), surface.F);
        write_block((dir / "h.bin").string(), surface.h);
        write_block((dir / "Umat.bin").string(), volume.U);
        write_block((dir / "Vmat.bin").string(), volume.V);
        write_block((dir / "t.bin").string(), volume.t);
    }
    if (options.dump_visibility) {
        auto out = open_out(config.output_dir / "visibility.csv");
        out << "point,element,fraction,depth\n";
        for (const auto& r : vis)
            out << r.point << ',' << r.element << ',' << r.fraction << ',' << r.depth << '\n';
    }

    double eps_min = 1.0, eps_max = 0.0;
    for (const auto& e : enc.mesh.elements()) {
        eps_min = std::min(eps_min, e.emissivity());
        eps_max = std::max(eps_max, e.emissivity());
    }
    const SolvabilityCheck margin = solvability_margin(props, eps_min);
    const double bound = contraction_bound(props, eps_min, props.domain_diameter);
    if (!margin.satisfied)
        std::cerr << "warning: solvability margin " << margin.margin
                  << " is not positive; uniqueness is not guaranteed\n";

    res.solution = solve_rites(surface, volume, medium_emission(enc, colloc, props.stefan_boltzmann), config.solver);
    const auto& sol = res.solution;

    {
        auto out = open_out(config.output_dir / "convergence.log");
        out << "iteration,change,ratio\n";
        for (std::size_t n = 0; n < sol.history.size(); ++n)
            out << n + 1 << ',' << sol.history[n] << ',' << (n >= 1 ? sol.ratios[n - 1] : 0.0) << '\n';
        out << "# converged " << (sol.converged ? "yes" : "no") << ", contraction ratio " << sol.contraction_ratio
            << ", bound " << bound << '\n';
    }

    auto& reports = res.reports;
    reports.push_back(energy_balance(sol, enc.mesh, enc.grid, colloc, props, config.energy_tolerance, aopt));
    for (auto& r : row_sum_reports(operator_row_sums(surface, volume, props, eps_min, eps_max,
                                                     config.row_sum_tolerance)))
        reports.push_back(std::move(r));
    reports.push_back(informational("solvability_margin", margin.margin, 0.0, margin.satisfied, "eps_min"));
    reports.push_back(informational("contraction_ratio", sol.contraction_ratio, bound,
                                    bound >= 1.0 || sol.contraction_ratio <= bound + 0.05, "last 5 ratios"));
    if (colloc.boundary_count() > 0) {
        const auto& b = colloc.boundary.front();
        reports.push_back(lemma1_identity(enc.mesh, {b.point, b.normal}, 0.01, aopt));
    }
    if (colloc.interior_count() > 0) {
        const Point3 centre = colloc.interior[static_cast<std::size_t>(colloc.interior_count() / 2)];
        reports.push_back(lemma3_interior_identity(enc.mesh, centre, 0.0, 0.01, aopt));
    }

    res.mandatory_pass = std::all_of(reports.begin(), reports.end(),
                                     [](const OracleReport& r) { return !r.mandatory || r.pass; });
    res.exit_code = sol.converged && res.mandatory_pass ? 0 : 1;

    {
        auto out = open_out(config.output_dir / "oracle_report.csv");
        write_reports_csv(out, reports);
    }
    {
        auto out = open_out(config.output_dir / "oracle_report.txt");
        write_reports_table(out, reports);
        out << "converged: " << (sol.converged ? "yes" : "no") << " after " << sol.iterations << " iterations\n";
    }
    {
        auto out = open_out(config.output_dir / "solution_q.csv");
        out << "index,element,local,x [m],y [m],z [m],q [W/m^2]\n";
        for (int i = 0; i < colloc.boundary_count(); ++i) {
            const auto& b = colloc.boundary[static_cast<std::size_t>(i)];
            out << i << ',' << b.element << ',' << b.local << ',' << b.point.x() << ',' << b.point.y() << ','
                << b.point.z() << ',' << sol.q(i) << '\n';
        }
    }
    {
        auto out = open_out(config.output_dir / "solution_G.csv");
        out << "index,cell,x [m],y [m],z [m],G [W/m^2]\n";
        for (int j = 0; j < colloc.interior_count(); ++j) {
            const Point3& x = colloc.interior[static_cast<std::size_t>(j)];
            out << j << ',' << colloc.medium_cells[static_cast<std::size_t>(j)] << ',' << x.x() << ',' << x.y()
                << ',' << x.z() << ',' << sol.G(j) << '\n';
        }
    }
    if (!config.profiles.empty()) {
        fs::create_directories(config.output_dir / "profiles");
        for (const auto& spec : config.profiles) {
            auto out = open_out(config.output_dir / "profiles" / (spec.name + ".csv"));
            emit_profile(out, sample_profile(sol, enc, colloc, spec), spec.quantity, config.reference_temperature,
                         props.stefan_boltzmann);
        }
    }
    return res;
}

} // namespace rite
