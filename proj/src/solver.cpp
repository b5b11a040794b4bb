#include "rite/solver.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>

namespace rite {

void SolverConfig::validate() const {
    if (!(tolerance > 0.0))
        throw ConfigError("solver tolerance must be positive");
    if (max_iterations < 1)
        throw ConfigError("solver needs at least one iteration");
}

SolvabilityCheck solvability_margin(const RadiativeProperties& props, double eps_min) {
    const double denom = props.extinction() + props.sigma_s;
    const double ratio = denom > 0.0 ? props.sigma_s / denom : 0.0;
    const double margin = eps_min - ratio;
    return {margin, margin > 0.0};
}

double contraction_bound(const RadiativeProperties& props, double eps_min, double diameter) {
    const double beta = props.extinction();
    if (props.sigma_s == 0.0 || beta == 0.0)
        return 0.0;
    return props.sigma_s / beta * (1.0 / eps_min - std::exp(-beta * diameter));
}

SolutionState solve_rites(const SurfaceSystem& surface, const VolumeSystem& volume,
                          const Eigen::VectorXd& medium_emission, const SolverConfig& config) {
    config.validate();
    const Eigen::Index nb = surface.G.rows();
    const Eigen::Index ni = volume.U.rows();
    if (surface.G.cols() != nb || surface.F.rows() != nb || surface.F.cols() != ni || surface.h.size() != nb ||
        volume.U.cols() != ni || volume.V.rows() != ni || volume.V.cols() != nb || volume.t.size() != ni ||
        medium_emission.size() != ni)
        throw Error("surface and volume systems do not match");

    const Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(nb, nb) - surface.G;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(inner);
    if (nb > 0) {
        const double rcond = lu.rcond();
        if (!std::isfinite(rcond) || rcond < config.min_rcond)
            throw SingularInnerSystem("I - Gmat is singular (rcond " + std::to_string(rcond) + ")");
    }
    auto solve_q = [&](const Eigen::VectorXd& g) -> Eigen::VectorXd {
        if (nb == 0)
            return Eigen::VectorXd();
        return lu.solve(surface.F * g + surface.h);
    };

    SolutionState st;
    Eigen::VectorXd g = medium_emission;
    // Without scattering coupling q does not depend on G, so one sweep is exact.
    const bool one_shot = ni == 0 || (surface.F.isZero(0.0) && volume.U.isZero(0.0));

    for (int n = 1; n <= config.max_iterations; ++n) {
        const Eigen::VectorXd q = solve_q(g);
        Eigen::VectorXd next = volume.U * g + volume.V * q + volume.t;
        double change = 0.0;
        if (!one_shot && ni > 0) {
            const double scale = std::max(next.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
            change = (next - g).cwiseAbs().maxCoeff() / scale;
        }
        g = std::move(next);
        st.history.push_back(change);
        st.iterations = n;
        double ratio = 0.0;
        if (st.history.size() >= 2) {
            const double prev = st.history[st.history.size() - 2];
            ratio = prev > 0.0 ? change / prev : 0.0;
            st.ratios.push_back(ratio);
        }
        std::clog << "outer " << n << " change " << std::setprecision(6) << std::scientific << change << " ratio "
                  << ratio << std::defaultfloat << '\n';
        if (change <= config.tolerance) {
            st.converged = true;
            break;
        }
    }
    st.q = solve_q(g);
    st.G = std::move(g);
    const std::size_t tail = std::min<std::size_t>(st.ratios.size(), 5);
    for (std::size_t k = st.ratios.size() - tail; k < st.ratios.size(); ++k)
        st.contraction_ratio = std::max(st.contraction_ratio, st.ratios[k]);
    return st;
}

} // namespace rite
