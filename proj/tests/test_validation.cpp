#include <doctest.h>

#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "rite/cases.hpp"
#include "rite/validation.hpp"

using namespace rite;

namespace {

constexpr double kPi = std::numbers::pi;

// icosahedron refined twice and projected to the unit sphere, inward normals
SurfaceMesh icosphere() {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Point3> v{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                          {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : v)
        p.normalize();
    std::vector<std::array<int, 3>> f{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int level = 0; level < 2; ++level) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end())
                return it->second;
            v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
            return mid[key] = static_cast<int>(v.size()) - 1;
        };
        std::vector<std::array<int, 3>> next;
        for (const auto& tri : f) {
            const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
            next.insert(next.end(), {{tri[0], a, c}, {tri[1], b, a}, {tri[2], c, b}, {a, b, c}});
        }
        f = std::move(next);
    }
    // winding reversed so normals point to the centre
    std::vector<std::vector<int>> conn;
    for (const auto& tri : f)
        conn.push_back({tri[0], tri[2], tri[1]});
    const std::size_t m = conn.size();
    return SurfaceMesh(std::move(v), std::move(conn), std::vector<double>(m, 1.0), std::vector<double>(m, 0.0));
}

struct Solved {
    Enclosure enc;
    RadiativeProperties props;
    CollocationSet colloc;
    SolutionState solution;
};

Solved solve_cube(int n, const CaseParams& cp, double sigma_a, double sigma_s) {
    Solved s{generate_case(BuiltinCase::Cube, n, cp), {}, {}, {}};
    s.props.sigma_a = sigma_a;
    s.props.sigma_s = sigma_s;
    s.props.domain_diameter = s.enc.mesh.diameter();
    s.colloc = collocation_points(s.enc.mesh, s.enc.grid);
    const auto surf = assemble_surface(s.enc.mesh, s.enc.grid, s.props, s.colloc);
    const auto vol = assemble_volume(s.enc.mesh, s.enc.grid, s.props, s.colloc);
    Eigen::VectorXd g0(s.colloc.interior_count());
    for (int j = 0; j < g0.size(); ++j)
        g0[j] = 4.0 * blackbody(s.enc.grid.temperature()[static_cast<std::size_t>(s.colloc.medium_cells[static_cast<std::size_t>(j)])])
                          .emissive_power;
    std::ostringstream log;
    auto* old = std::clog.rdbuf(log.rdbuf());
    s.solution = solve_rites(surf, vol, g0);
    std::clog.rdbuf(old);
    return s;
}

} // namespace

TEST_CASE("oracle report comparison") {
    const OracleReport r = compare_to("x", 1.005, 1.0, 0.01, "n=4");
    CHECK(r.pass);
    CHECK(r.abs_deviation == doctest::Approx(0.005));
    CHECK(r.rel_deviation == doctest::Approx(0.005));
    CHECK(r.resolution == "n=4");
    CHECK_FALSE(compare_to("x", 1.02, 1.0, 0.01).pass);
    CHECK(compare_to("x", -0.99, -1.0, 0.011).pass);
}

TEST_CASE("closure identity from boundary points") {
    const Enclosure cube = generate_case(BuiltinCase::Cube, 4);
    const CollocationSet colloc = collocation_points(cube.mesh, cube.grid);
    for (int i = 0; i < colloc.boundary_count(); i += 13) {
        const auto& b = colloc.boundary[static_cast<std::size_t>(i)];
        const OracleReport r = lemma1_identity(cube.mesh, {b.point, b.normal});
        CHECK(r.pass);
        CHECK(r.reference == doctest::Approx(kPi).epsilon(1e-15));
    }

    const SurfaceMesh sphere = icosphere();
    REQUIRE(sphere.size() == 320);
    CHECK_NOTHROW(sphere.check_closed());
    const CollocationSet sc = collocation_points(sphere, VoxelGrid(Point3(-1, -1, -1), Vector3(2, 2, 2), {1, 1, 1}));
    for (int i = 0; i < sc.boundary_count(); i += 97) {
        const auto& b = sc.boundary[static_cast<std::size_t>(i)];
        CHECK(lemma1_identity(sphere, {b.point, b.normal}, 0.02).pass);
    }
}

TEST_CASE("solid-angle identity from interior points") {
    const Enclosure cube = generate_case(BuiltinCase::Cube, 4);
    for (const Point3& p : {Point3(0.5, 0.5, 0.5), Point3(0.2, 0.7, 0.35), Point3(0.05, 0.9, 0.93)}) {
        CHECK(lemma3_interior_identity(cube.mesh, p).pass);
        const double attenuated = lemma3_integral(cube.mesh, p, 1.5);
        CHECK(attenuated < 4 * kPi);
        CHECK(attenuated > 0.0);
        CHECK(lemma3_interior_identity(cube.mesh, p, 1.5).pass);
    }
}

TEST_CASE("identity deviations halve under refinement") {
    // fixed physical points so every level sees the same geometry
    const std::vector<Source> bpts{{Point3(0.3, 0.4, 0.0), Vector3(0, 0, 1)},
                                   {Point3(0.77, 0.0, 0.2), Vector3(0, 1, 0)},
                                   {Point3(1.0, 0.52, 0.61), Vector3(-1, 0, 0)}};
    const std::vector<Point3> ipts{Point3(0.5, 0.5, 0.5), Point3(0.3, 0.6, 0.45), Point3(0.21, 0.33, 0.72)};
    double prev1 = 0.0, prev3 = 0.0;
    for (int n : {4, 8, 16}) {
        const Enclosure cube = generate_case(BuiltinCase::Cube, n);
        double d1 = 0.0, d3 = 0.0;
        for (const auto& s : bpts)
            d1 = std::max(d1, std::abs(lemma1_integral(cube.mesh, s) - kPi));
        for (const auto& p : ipts)
            d3 = std::max(d3, std::abs(lemma3_integral(cube.mesh, p) - 4 * kPi));
        if (n > 4) {
            CHECK(d1 <= 0.5 * prev1);
            CHECK(d3 <= 0.5 * prev3);
        }
        prev1 = d1;
        prev3 = d3;
    }
}

TEST_CASE("visibility oracle") {
    const Enclosure cube = generate_case(BuiltinCase::Cube, 2);
    for (int k = 0; k < 24; k += 5)
        CHECK(visibility_oracle(Point3(0.5, 0.5, 0.5), k, cube.mesh) == 1.0);

    auto rect = [](double x0, double x1, double z, bool up) {
        std::array<Point3, 4> v{Point3(x0, -1, z), Point3(x1, -1, z), Point3(x1, 2, z), Point3(x0, 2, z)};
        if (!up)
            std::swap(v[1], v[3]);
        return SurfaceElement::build(v, 1.0);
    };
    const std::array<Point3, 4> tv{Point3(0, 0, 2), Point3(0, 1, 2), Point3(1, 1, 2), Point3(1, 0, 2)};
    const SurfaceElement target = SurfaceElement::build(tv, 1.0);
    const Point3 p(0.5, 0.5, 0.0);
    const SurfaceMesh full = SurfaceMesh::from_elements({target, rect(-1, 2, 1.0, true)});
    CHECK(visibility_oracle(p, 0, full) == 0.0);
    const SurfaceMesh half = SurfaceMesh::from_elements({target, rect(-1, 0.5, 1.0, true)});
    const int n = 40000;
    const double f = visibility_oracle(p, 0, half, n);
    CHECK(std::abs(f - 0.5) <= 3.0 / std::sqrt(n));
    CHECK(visibility_oracle(p, 0, half, n) == f);
    CHECK(visibility_oracle(p, 0, half, n, 99) == doctest::Approx(f).epsilon(0.02));
}

TEST_CASE("energy balance") {
    SUBCASE("pure scattering: no net wall flux") {
        CaseParams cp;
        cp.bottom_temperature = 1000.0;
        const Solved s = solve_cube(4, cp, 0.0, 1.0);
        REQUIRE(s.solution.converged);
        const EnergyTerms e = energy_terms(s.solution, s.enc.mesh, s.enc.grid, s.colloc, s.props);
        CHECK(e.medium == 0.0);
        CHECK(std::abs(e.surface) <= 0.03 * e.wall_emission);
        const OracleReport r = energy_balance(s.solution, s.enc.mesh, s.enc.grid, s.colloc, s.props);
        CHECK(r.pass);
        CHECK(r.mandatory);
    }
    SUBCASE("isothermal cavity") {
        CaseParams cp;
        cp.emissivity = 0.8;
        cp.wall_temperature = 600.0;
        cp.medium_temperature = 600.0;
        const Solved s = solve_cube(3, cp, 0.5, 0.5);
        const EnergyTerms e = energy_terms(s.solution, s.enc.mesh, s.enc.grid, s.colloc, s.props);
        CHECK(e.wall_emission == doctest::Approx(0.8 * kStefanBoltzmann * std::pow(600.0, 4) * 6.0).epsilon(1e-12));
        CHECK(std::abs(e.surface) <= 0.01 * e.wall_emission);
        CHECK(std::abs(e.medium) <= 0.01 * e.wall_emission);
        CHECK(energy_balance(s.solution, s.enc.mesh, s.enc.grid, s.colloc, s.props, 0.01).pass);
    }
    SUBCASE("hot medium, cold black walls") {
        CaseParams cp;
        cp.medium_temperature = 1000.0;
        const Solved s = solve_cube(4, cp, 1.0, 0.0);
        const EnergyTerms e = energy_terms(s.solution, s.enc.mesh, s.enc.grid, s.colloc, s.props);
        CHECK(e.surface > 0.0);
        CHECK(e.medium > 0.0);
        CHECK(std::abs(e.surface - e.medium) <= 0.03 * std::max(e.surface, e.medium));
        CHECK(energy_balance(s.solution, s.enc.mesh, s.enc.grid, s.colloc, s.props).pass);
    }
}

TEST_CASE("report output") {
    std::vector<OracleReport> reports{compare_to("energy_balance", 1.0, 1.01, 0.03, "n=3"),
                                      compare_to("lemma1", 3.0, kPi, 0.01, "n=3")};
    reports[0].mandatory = true;
    std::ostringstream csv, table;
    write_reports_csv(csv, reports);
    write_reports_table(table, reports);
    std::istringstream in(csv.str());
    std::string header, line;
    std::getline(in, header);
    CHECK(header.find("check") != std::string::npos);
    CHECK(header.find("mandatory") != std::string::npos);
    int rows = 0;
    while (std::getline(in, line))
        rows += !line.empty();
    CHECK(rows == 2);
    CHECK(table.str().find("energy_balance") != std::string::npos);
    CHECK(table.str().find("FAIL") != std::string::npos);

    RowSumReport rs;
    rs.row_sum = {0.4, 0.1, 0.2, 3.0};
    rs.bound = {0.5, 0.1, 0.1, 4.0};
    rs.within = {true, true, false, true};
    const auto rr = row_sum_reports(rs);
    REQUIRE(rr.size() == 4);
    CHECK(rr[0].pass);
    CHECK_FALSE(rr[2].pass);
    for (const auto& r : rr)
        CHECK(r.mandatory);
}
