#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

#include "rite/case_runner.hpp"
#include "rite/cases.hpp"

using namespace rite;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rite_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// mesh file plus a config document for a small builtin case
json write_case(const fs::path& dir, BuiltinCase kind, int n, const CaseParams& cp, double sigma_a, double sigma_s) {
    save_enclosure(dir / "mesh.json", generate_case(kind, n, cp));
    return {{"mesh", "mesh.json"},
            {"properties", {{"sigma_a", sigma_a}, {"sigma_s", sigma_s}}},
            {"output_dir", "out"},
            {"threads", 1}};
}

CaseResult quiet_run(const CaseConfig& c, const RunOptions& o = {}) {
    std::ostringstream sink;
    auto* old = std::clog.rdbuf(sink.rdbuf());
    auto* olde = std::cerr.rdbuf(sink.rdbuf());
    CaseResult r = run_case(c, o);
    std::clog.rdbuf(old);
    std::cerr.rdbuf(olde);
    return r;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RITE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("builtin cases") {
    const Enclosure c5 = generate_case(BuiltinCase::Cube, 5);
    CHECK(c5.mesh.size() == 150);
    CHECK(c5.grid.cell_count() == 125);
    CHECK(parse_builtin_case("LSHAPE") == BuiltinCase::LShape);
    CHECK(parse_builtin_case("cube") == BuiltinCase::Cube);
    CHECK_THROWS_AS(parse_builtin_case("TORUS"), ConfigError);

    const Enclosure l = generate_case(BuiltinCase::LShape, 2);
    CHECK(l.mesh.size() == 88);
    CHECK_NOTHROW(l.mesh.check_closed());
    double area = 0.0;
    for (const auto& e : l.mesh.elements())
        area += e.area();
    CHECK(area == doctest::Approx(22.0).epsilon(1e-12));
    const Point3 lo = l.grid.box_min(), hi = l.grid.box_max();
    CHECK((lo - Point3(0, 0, 0)).norm() < 1e-14);
    CHECK((hi - Point3(1, 3, 3)).norm() < 1e-14);
    CHECK(chi_point(Point3(0.5, 2.5, 0.0), Point3(0.5, 0.5, 3.0), l.mesh) == 0);
    for (double t : l.mesh.temperature())
        CHECK(t == 500.0);
    const CollocationSet lc = collocation_points(l.mesh, l.grid);
    for (int c : lc.medium_cells)
        CHECK(l.grid.temperature()[static_cast<std::size_t>(c)] == 1000.0);
}

TEST_CASE("config parsing") {
    const fs::path dir = scratch("parse");
    save_enclosure(dir / "m.json", generate_case(BuiltinCase::Cube, 1));
    const json doc = {{"mesh", "m.json"},
                      {"properties", {{"sigma_a", 0.3}, {"sigma_s", 0.7}}},
                      {"profiles", {{{"name", "p"}, {"quantity", "G"}, {"start", {0, 0, 0}}, {"end", {1, 0, 0}}, {"samples", 5}}}}};
    const CaseConfig c = parse_case_config(doc, dir);
    CHECK(c.mesh == dir / "m.json");
    CHECK(c.properties.sigma_a == 0.3);
    CHECK(c.solver.tolerance == 1e-8);
    CHECK(c.solver.max_iterations == 200);
    CHECK(c.visibility.budget.min_area_fraction == 1e-4);
    REQUIRE(c.profiles.size() == 1);
    CHECK(c.profiles[0].quantity == ProfileQuantity::G);
    CHECK(c.profiles[0].samples == 5);

    // echo and re-parse give the same document
    const json echo = case_config_to_json(c);
    CHECK(case_config_to_json(parse_case_config(echo)) == echo);

    auto bad = doc;
    bad["profiles"][0]["samples"] = 1;
    CHECK_THROWS_AS(parse_case_config(bad, dir), ConfigError);
    bad = doc;
    bad["profiles"][0]["quantity"] = "T";
    CHECK_THROWS_AS(parse_case_config(bad, dir), ConfigError);
    bad = doc;
    bad["properties"]["sigma_s"] = -1.0;
    CHECK_THROWS_AS(parse_case_config(bad, dir), ConfigError);
    bad = doc;
    bad["properties"] = {{"sigma_a", 0.0}, {"sigma_s", 0.0}};
    CHECK_THROWS_AS(parse_case_config(bad, dir), ConfigError);
    bad = doc;
    bad["solver"] = {{"tolerance", "tight"}};
    CHECK_THROWS_AS(parse_case_config(bad, dir), ConfigError);
    CHECK_THROWS_AS(load_case_config(dir / "missing.json"), ConfigError);
    bad = doc;
    bad["mesh"] = "absent.json";
    CHECK_THROWS_AS(parse_case_config(bad, dir), ConfigError);
}

TEST_CASE("profile sampling") {
    const Enclosure cube = generate_case(BuiltinCase::Cube, 2);
    const CollocationSet colloc = collocation_points(cube.mesh, cube.grid);
    SolutionState st;
    st.q = Eigen::VectorXd::Constant(colloc.boundary_count(), 3.5);
    st.G.resize(colloc.interior_count());
    for (int j = 0; j < st.G.size(); ++j)
        st.G[j] = 10.0 * j;

    ProfileSpec q{"q", ProfileQuantity::Q, Point3(0, 0.5, 1), Point3(1, 0.5, 1), 9};
    for (const auto& s : sample_profile(st, cube, colloc, q))
        CHECK(s.value == 3.5);

    ProfileSpec two{"two", ProfileQuantity::Q, Point3(0.1, 0.2, 0), Point3(0.8, 0.9, 0), 2};
    const auto ends = sample_profile(st, cube, colloc, two);
    REQUIRE(ends.size() == 2);
    CHECK(ends[0].x == two.start);
    CHECK(ends[1].x == two.end);
    CHECK(ends[1].s == doctest::Approx((two.end - two.start).norm()));

    // cell-centre line: exact cell values
    ProfileSpec g{"g", ProfileQuantity::G, Point3(0.25, 0.25, 0.25), Point3(0.75, 0.25, 0.25), 2};
    const auto cells = sample_profile(st, cube, colloc, g);
    CHECK(cells[0].value == st.G[colloc.cell_to_medium[static_cast<std::size_t>(cube.grid.index(0, 0, 0))]]);
    CHECK(cells[1].value == st.G[colloc.cell_to_medium[static_cast<std::size_t>(cube.grid.index(1, 0, 0))]]);

    ProfileSpec outside{"o", ProfileQuantity::G, Point3(0.5, 0.5, 0.5), Point3(2.5, 0.5, 0.5), 5};
    CHECK_THROWS_AS(sample_profile(st, cube, colloc, outside), LineOutsideDomain);
    ProfileSpec interior_q{"iq", ProfileQuantity::Q, Point3(0.5, 0.5, 0.5), Point3(0.5, 0.5, 1.0), 3};
    CHECK_THROWS_AS(sample_profile(st, cube, colloc, interior_q), LineOutsideDomain);

    std::ostringstream csv;
    emit_profile(csv, cells, ProfileQuantity::G, 1000.0);
    std::string header;
    std::istringstream in(csv.str());
    std::getline(in, header);
    CHECK(header == "s [m],x [m],y [m],z [m],G [W/m^2],G/(sigma*Tref^4) [-]");
}

TEST_CASE("run_case outputs, determinism and config echo") {
    const fs::path dir = scratch("run");
    CaseParams cp = default_params(BuiltinCase::Cube);
    json doc = write_case(dir, BuiltinCase::Cube, 2, cp, 0.0, 1.0);
    doc["reference_temperature"] = 1000.0;
    doc["profiles"] = {{{"name", "q_top_x"}, {"quantity", "q"}, {"start", {0, 0.5, 1}}, {"end", {1, 0.5, 1}}, {"samples", 9}},
                       {{"name", "G_mid"}, {"quantity", "G"}, {"start", {0, 0.5, 0.5}}, {"end", {1, 0.5, 0.5}}, {"samples", 9}}};
    std::ofstream(dir / "config.json") << doc.dump(2);

    const CaseConfig c = load_case_config(dir / "config.json");
    const CaseResult r = quiet_run(c, {true, true});
    CHECK(r.exit_code == 0);
    CHECK(r.solution.converged);
    CHECK(r.mandatory_pass);
    const fs::path out = dir / "out";
    for (const char* f : {"effective_config.json", "convergence.log", "oracle_report.csv", "oracle_report.txt",
                          "solution_q.csv", "solution_G.csv", "visibility.csv", "profiles/q_top_x.csv",
                          "profiles/G_mid.csv", "matrices/Gmat.bin", "matrices/Umat.bin"})
        CHECK_MESSAGE(fs::exists(out / f), f);
    CHECK(read_block((out / "matrices/Gmat.bin").string()).rows() == 96);

    // rerun from the echoed config into a second directory
    json echo = json::parse(slurp(out / "effective_config.json"));
    echo["output_dir"] = (dir / "out2").string();
    const CaseResult r2 = quiet_run(parse_case_config(echo));
    CHECK(r2.exit_code == 0);
    for (const char* f : {"solution_q.csv", "solution_G.csv", "oracle_report.csv", "profiles/q_top_x.csv",
                          "profiles/G_mid.csv", "convergence.log"})
        CHECK_MESSAGE(slurp(out / f) == slurp(dir / "out2" / f), f);
    CHECK(r2.solution.q == r.solution.q);
}

TEST_CASE("exit code follows convergence and mandatory oracles") {
    const fs::path dir = scratch("exit");
    json doc = write_case(dir, BuiltinCase::Cube, 2, default_params(BuiltinCase::Cube), 0.0, 1.0);
    doc["solver"] = {{"max_iterations", 2}};
    const CaseResult r = quiet_run(parse_case_config(doc, dir));
    CHECK_FALSE(r.solution.converged);
    CHECK(r.exit_code != 0);

    doc["solver"] = {{"max_iterations", 200}};
    doc["energy_tolerance"] = 1e-12;
    const CaseResult strict = quiet_run(parse_case_config(doc, dir));
    CHECK(strict.solution.converged);
    CHECK_FALSE(strict.mandatory_pass);
    CHECK(strict.exit_code != 0);
}

TEST_CASE("L-shape without scattering converges in one iteration") {
    const fs::path dir = scratch("lshape");
    const json doc = write_case(dir, BuiltinCase::LShape, 1, default_params(BuiltinCase::LShape), 0.5, 0.0);
    const CaseResult r = quiet_run(parse_case_config(doc, dir));
    CHECK(r.solution.converged);
    CHECK(r.solution.iterations == 1);
}

TEST_CASE("command line") {
    const fs::path dir = scratch("cli");
    CHECK(run_cli("generate CUBE 2 --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "mesh.json"));
    CHECK(fs::exists(dir / "config.json"));
    CHECK(run_cli("run --config " + (dir / "config.json").string() + " --out " + (dir / "a").string() +
                  " --threads 1 --dump-matrices") == 0);
    CHECK(fs::exists(dir / "a" / "matrices" / "Fmat.bin"));
    CHECK(fs::exists(dir / "a" / "profiles" / "q_top_x.csv"));
    CHECK(run_cli("run --config " + (dir / "config.json").string() + " --out " + (dir / "b").string() +
                  " --threads 1 --max-iter 1") == 1);
    CHECK(run_cli("run --config " + (dir / "nope.json").string()) != 0);
    CHECK(run_cli("generate TORUS 2 --out " + dir.string()) == 2);
    CHECK(run_cli("validate --case CUBE --resolution 2 --out " + (dir / "v").string()) == 0);
    CHECK(fs::exists(dir / "v" / "validation_report.csv"));
}
