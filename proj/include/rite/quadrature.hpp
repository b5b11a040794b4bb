#pragma once

#include <vector>

#include "rite/geometry.hpp"

namespace rite {

struct GaussRule {
    std::vector<double> nodes;   ///< on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, 1 <= n <= 64. Rules are built once.
const GaussRule& gauss_legendre(int n);

struct QuadratureOptions {
    /// Fewest Gauss points per direction on any patch.
    int min_order = 2;
    int max_order = 16;
    /// Target relative error per element is tolerance * (diameter / length_scale)^4,
    /// so the integration error falls with mesh refinement.
    double tolerance = 1e-2;
    /// Cap on the per-element target, for elements that are large against length_scale.
    double max_tolerance = 1e-5;
    double length_scale = 1.0; ///< m; assembly sets the domain diameter
    /// Patches closer than split_distance diameters are split toward the
    /// point nearest the source, at most near_levels times.
    double split_distance = 1.0;
    int near_levels = 6;

    void validate() const;
};

struct QuadPoint {
    Point3 x;
    Param2 ref;     ///< parent element reference coordinates
    double weight;  ///< includes all Jacobians
};

/// Fixed tensor rule (collapsed for triangles) over a patch of parent.
void patch_rule(const SurfaceElement& parent, const Patch& patch, int order, std::vector<QuadPoint>& out);

/// Gauss points per direction for a patch at relative distance
/// d = dist(source, patch) / diameter(patch): the smallest n with
/// rho^(-2n) <= tol, rho = 2d + sqrt(4d^2 + 1), clamped to [min_order, max_order].
int order_for_distance(double d, double tol, const QuadratureOptions& options);

/// Appends quadrature points over a patch of parent, splitting near patches
/// toward the point nearest the source and choosing each leaf's order with
/// order_for_distance.
void banded_rule(const Point3& source, const SurfaceElement& parent, const Patch& patch,
                 const QuadratureOptions& options, std::vector<QuadPoint>& out);

} // namespace rite
