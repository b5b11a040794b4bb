#include <doctest.h>

#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

#include "rite/cases.hpp"
#include "rite/solver.hpp"

using namespace rite;

namespace {

RadiativeProperties props(double sigma_a, double sigma_s) {
    RadiativeProperties p;
    p.sigma_a = sigma_a;
    p.sigma_s = sigma_s;
    return p;
}

Eigen::MatrixXd random_nonneg(int rows, int cols, double row_sum, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j)
            m(i, j) = u(rng);
        m.row(i) *= row_sum / m.row(i).sum();
    }
    return m;
}

struct Physical {
    Enclosure enc;
    RadiativeProperties props;
    CollocationSet colloc;
    SurfaceSystem surface;
    VolumeSystem volume;
    Eigen::VectorXd g0;
};

Physical physical(const CaseParams& cp, double sigma_a, double sigma_s, int n = 3) {
    Physical p{generate_case(BuiltinCase::Cube, n, cp), props(sigma_a, sigma_s), {}, {}, {}, {}};
    p.props.domain_diameter = p.enc.mesh.diameter();
    p.colloc = collocation_points(p.enc.mesh, p.enc.grid);
    p.surface = assemble_surface(p.enc.mesh, p.enc.grid, p.props, p.colloc);
    p.volume = assemble_volume(p.enc.mesh, p.enc.grid, p.props, p.colloc);
    p.g0.resize(p.colloc.interior_count());
    for (int j = 0; j < p.colloc.interior_count(); ++j)
        p.g0[j] = 4.0 * blackbody(p.enc.grid.temperature()[static_cast<std::size_t>(p.colloc.medium_cells[static_cast<std::size_t>(j)])])
                            .emissive_power;
    return p;
}

} // namespace

TEST_CASE("solvability margin") {
    const auto a = solvability_margin(props(1.0, 1.0), 0.5);
    CHECK(a.margin == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(a.satisfied);
    const auto b = solvability_margin(props(0.0, 2.0), 0.2);
    CHECK(b.margin == doctest::Approx(-0.3).epsilon(1e-12));
    CHECK_FALSE(b.satisfied);
    for (double sa : {0.0, 0.1, 3.0})
        for (double ss : {0.0, 0.5, 10.0})
            if (sa + ss > 0.0)
                CHECK(solvability_margin(props(sa, ss), 1.0).satisfied);
}

TEST_CASE("contraction bound") {
    CHECK(contraction_bound(props(2.0, 0.0), 0.3, 1.7) == 0.0);
    CHECK(contraction_bound(props(1.0, 1.0), 1.0, 1.0) == doctest::Approx(0.5 * (1.0 - std::exp(-2.0))).epsilon(1e-12));
    CHECK(std::abs(contraction_bound(props(1.0, 1.0), 1.0, 1.0) - 0.4323) < 5e-5);
    // large beta R: the bound tends to (sigma_s / beta) / eps and stays above (sigma_s / beta)(1 - eps) / eps
    const auto p = props(3.0, 5.0);
    const double b = contraction_bound(p, 0.7, 10.0);
    CHECK(b == doctest::Approx(5.0 / 8.0 / 0.7).epsilon(1e-12));
    CHECK(b >= 5.0 / 8.0 * 0.3 / 0.7);
}

TEST_CASE("config validation") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    c.tolerance = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.max_iterations = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("one-shot without coupling") {
    std::mt19937_64 rng(3);
    const int nb = 12, ni = 5;
    SurfaceSystem s{random_nonneg(nb, nb, 0.4, rng), Eigen::MatrixXd::Zero(nb, ni), Eigen::VectorXd::Random(nb)};
    VolumeSystem v{Eigen::MatrixXd::Zero(ni, ni), random_nonneg(ni, nb, 1.5, rng), Eigen::VectorXd::Random(ni)};
    const SolutionState st = solve_rites(s, v, Eigen::VectorXd::Constant(ni, 7.0));
    CHECK(st.converged);
    CHECK(st.iterations == 1);
    REQUIRE(st.history.size() == 1);
    CHECK(st.history[0] == 0.0);
    const Eigen::VectorXd f = (Eigen::MatrixXd::Identity(nb, nb) - s.G).lu().solve(s.h);
    CHECK((st.q - f).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((st.G - (v.V * f + v.t)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("coupled fixed point") {
    std::mt19937_64 rng(4);
    const int nb = 20, ni = 8;
    SurfaceSystem s{random_nonneg(nb, nb, 0.5, rng), random_nonneg(nb, ni, 0.1, rng), Eigen::VectorXd::Ones(nb)};
    VolumeSystem v{random_nonneg(ni, ni, 0.3, rng), random_nonneg(ni, nb, 0.6, rng), Eigen::VectorXd::Ones(ni)};
    std::ostringstream log;
    auto* old = std::clog.rdbuf(log.rdbuf());
    const SolutionState st = solve_rites(s, v, Eigen::VectorXd::Zero(ni));
    std::clog.rdbuf(old);
    CHECK(st.converged);
    CHECK(st.history.back() <= 1e-8);
    CHECK(st.ratios.size() + 1 == st.history.size());
    CHECK(st.contraction_ratio < 1.0);
    // residuals of both equations
    const Eigen::VectorXd rq = st.q - s.G * st.q - s.F * st.G - s.h;
    const Eigen::VectorXd rg = st.G - v.U * st.G - v.V * st.q - v.t;
    CHECK(rq.cwiseAbs().maxCoeff() < 1e-7 * st.q.cwiseAbs().maxCoeff());
    CHECK(rg.cwiseAbs().maxCoeff() < 1e-7 * st.G.cwiseAbs().maxCoeff());
    // nonnegative data, nonnegative operators
    CHECK(st.G.minCoeff() >= 0.0);
    CHECK(st.q.minCoeff() >= 0.0);
    // one log line per iteration
    int lines = 0;
    for (char c : log.str())
        lines += c == '\n';
    CHECK(lines == st.iterations);
    CHECK(log.str().rfind("outer 1 change ", 0) == 0);

    SolverConfig short_budget;
    short_budget.max_iterations = 2;
    std::clog.rdbuf(log.rdbuf());
    const SolutionState cut = solve_rites(s, v, Eigen::VectorXd::Zero(ni), short_budget);
    std::clog.rdbuf(old);
    CHECK_FALSE(cut.converged);
    CHECK(cut.iterations == 2);
    CHECK(cut.history.size() == 2);
}

TEST_CASE("singular inner system and mismatched blocks") {
    const int nb = 3, ni = 1;
    SurfaceSystem s{Eigen::MatrixXd::Identity(nb, nb), Eigen::MatrixXd::Zero(nb, ni), Eigen::VectorXd::Ones(nb)};
    VolumeSystem v{Eigen::MatrixXd::Zero(ni, ni), Eigen::MatrixXd::Zero(ni, nb), Eigen::VectorXd::Ones(ni)};
    CHECK_THROWS_AS(solve_rites(s, v, Eigen::VectorXd::Zero(ni)), SingularInnerSystem);
    s.G.setZero();
    CHECK_THROWS_AS(solve_rites(s, v, Eigen::VectorXd::Zero(2)), Error);
}

TEST_CASE("isothermal equilibrium") {
    const double T = 900.0;
    CaseParams cp;
    cp.emissivity = 0.6;
    cp.wall_temperature = T;
    cp.medium_temperature = T;
    const Physical p = physical(cp, 0.5, 0.5);
    std::ostringstream log;
    auto* old = std::clog.rdbuf(log.rdbuf());
    const SolutionState st = solve_rites(p.surface, p.volume, p.g0);
    std::clog.rdbuf(old);
    CHECK(st.converged);
    const double eb = kStefanBoltzmann * std::pow(T, 4);
    CHECK(st.q.cwiseAbs().maxCoeff() <= 0.01 * eb);
    CHECK((st.G.array() - 4.0 * eb).abs().maxCoeff() <= 0.04 * eb);
}

TEST_CASE("black walls without scattering converge in one sweep, deterministically") {
    CaseParams cp;
    cp.wall_temperature = 400.0;
    cp.bottom_temperature = 1000.0;
    cp.medium_temperature = 700.0;
    const Physical p = physical(cp, 1.0, 0.0);
    std::ostringstream log;
    auto* old = std::clog.rdbuf(log.rdbuf());
    const SolutionState a = solve_rites(p.surface, p.volume, p.g0);
    const SolutionState b = solve_rites(p.surface, p.volume, p.g0);
    std::clog.rdbuf(old);
    CHECK(a.iterations == 1);
    CHECK(a.converged);
    CHECK(a.q == b.q);
    CHECK(a.G == b.G);
    CHECK(a.G.minCoeff() >= 0.0);
}

TEST_CASE("measured contraction stays below the bound") {
    CaseParams cp;
    cp.wall_temperature = 300.0;
    cp.bottom_temperature = 1000.0;
    const Physical p = physical(cp, 0.5, 1.0);
    std::ostringstream log;
    auto* old = std::clog.rdbuf(log.rdbuf());
    const SolutionState st = solve_rites(p.surface, p.volume, p.g0);
    std::clog.rdbuf(old);
    CHECK(st.converged);
    CHECK(st.contraction_ratio <= contraction_bound(p.props, 1.0, p.props.domain_diameter) + 0.05);
    CHECK(st.G.minCoeff() >= 0.0);
    // eventually monotone
    for (std::size_t k = st.history.size() / 2; k + 1 < st.history.size(); ++k)
        CHECK(st.history[k + 1] <= st.history[k]);
}
