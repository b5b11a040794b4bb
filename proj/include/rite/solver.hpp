#pragma once

#include <Eigen/Core>

#include <vector>

#include "rite/assembly.hpp"
#include "rite/kernels.hpp"

namespace rite {

struct SolverConfig {
    double tolerance = 1e-8; ///< relative sup-norm change of G
    int max_iterations = 200;
    /// Reciprocal condition estimate below which I - Gmat counts as singular.
    double min_rcond = 1e-12;

    void validate() const;
};

struct SolutionState {
    Eigen::VectorXd q;               ///< net incoming flux at boundary collocation points, W/m^2
    Eigen::VectorXd G;               ///< incident energy at medium cells, W/m^2
    std::vector<double> history;     ///< relative sup-norm change of G per outer iteration
    std::vector<double> ratios;      ///< successive change ratios, from the second iteration on
    bool converged = false;
    int iterations = 0;
    double contraction_ratio = 0.0;  ///< max of the last (up to five) successive ratios
};

struct SolvabilityCheck {
    double margin;
    bool satisfied;
};

/// eps_min - sigma_s / (beta + sigma_s); the scheme has a unique solution when positive.
SolvabilityCheck solvability_margin(const RadiativeProperties& props, double eps_min);

/// (sigma_s / beta)(1 / eps_min - exp(-beta R)). Convergence is guaranteed below 1.
double contraction_bound(const RadiativeProperties& props, double eps_min, double diameter);

/// Outer/inner iteration: (I - Gmat) q = F G + h, then G = U G + V q + t.
/// G starts from medium_emission (4 sigma T^4 per cell). Each iteration logs
/// one line to std::clog. Throws SingularInnerSystem when I - Gmat cannot be
/// factored; an exhausted budget returns with converged = false.
SolutionState solve_rites(const SurfaceSystem& surface, const VolumeSystem& volume,
                          const Eigen::VectorXd& medium_emission, const SolverConfig& config = {});

} // namespace rite
