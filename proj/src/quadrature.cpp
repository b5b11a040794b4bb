#include "rite/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace rite {

namespace {

constexpr int kMaxOrder = 64;

GaussRule build_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int m = (n + 1) / 2;
    for (int i = 1; i <= m; ++i) {
        double z = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
        double z_prev = 0.0;
        double dp = 0.0;
        do {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            dp = n * (z * p1 - p2) / (z * z - 1.0);
            z_prev = z;
            z = z_prev - p1 / dp;
        } while (std::abs(z - z_prev) > 1e-15);
        const auto lo = static_cast<std::size_t>(i - 1);
        const auto hi = static_cast<std::size_t>(n - i);
        rule.nodes[lo] = -z;
        rule.nodes[hi] = z;
        rule.weights[lo] = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.weights[hi] = rule.weights[lo];
    }
    return rule;
}

bool interior_split_point(const Patch& patch, const Param2& f, double margin) {
    if (patch.shape == ElementShape::Quad) {
        const double tx = (f.x() - patch.corners[0].x()) / (patch.corners[2].x() - patch.corners[0].x());
        const double ty = (f.y() - patch.corners[0].y()) / (patch.corners[2].y() - patch.corners[0].y());
        return tx > margin && tx < 1 - margin && ty > margin && ty < 1 - margin;
    }
    Eigen::Matrix2d jac;
    jac.col(0) = patch.corners[1] - patch.corners[0];
    jac.col(1) = patch.corners[2] - patch.corners[0];
    const Param2 local = jac.lu().solve(f - patch.corners[0]);
    const double w0 = 1.0 - local.x() - local.y();
    return local.x() > margin && local.y() > margin && w0 > margin;
}

void banded(const Point3& source, const SurfaceElement& parent, const Patch& patch, const QuadratureOptions& opt,
            double tol, int level, std::vector<QuadPoint>& out) {
    const SurfaceElement geom = patch_geometry(parent, patch);
    const Point3 foot = geom.closest_point(source);
    const double d = (foot - source).norm() / geom.diameter();
    if (d > opt.split_distance || level >= opt.near_levels) {
        patch_rule(parent, patch, order_for_distance(d, tol, opt), out);
        return;
    }
    const Param2 f = parent.reference_coordinates(foot);
    if (interior_split_point(patch, f, 0.02)) {
        for (const auto& child : patch.split_at(f))
            banded(source, parent, child, opt, tol, level + 1, out);
    } else {
        for (const auto& child : patch.subdivide())
            banded(source, parent, child, opt, tol, level + 1, out);
    }
}

} // namespace

const GaussRule& gauss_legendre(int n) {
    static const std::array<GaussRule, kMaxOrder + 1> rules = [] {
        std::array<GaussRule, kMaxOrder + 1> r;
        for (int k = 1; k <= kMaxOrder; ++k)
            r[static_cast<std::size_t>(k)] = build_rule(k);
        return r;
    }();
    if (n < 1 || n > kMaxOrder)
        throw Error("Gauss-Legendre order out of range");
    return rules[static_cast<std::size_t>(n)];
}

void QuadratureOptions::validate() const {
    if (min_order < 1 || max_order > kMaxOrder || min_order > max_order)
        throw ConfigError("quadrature orders must satisfy 1 <= min <= max <= 64");
    if (!(tolerance > 0.0) || !(max_tolerance > 0.0) || !(length_scale > 0.0) || !(split_distance >= 0.0))
        throw ConfigError("quadrature tolerance, length scale and split distance must be positive");
    if (near_levels < 0)
        throw ConfigError("near-field levels must be non-negative");
}

int order_for_distance(double d, double tol, const QuadratureOptions& options) {
    const double dd = 2.0 * std::max(d, 1e-3);
    const double rho = dd + std::sqrt(dd * dd + 1.0);
    const double n = std::ceil(std::log(1.0 / tol) / (2.0 * std::log(rho)));
    return std::clamp(static_cast<int>(std::min(n, 1e6)), options.min_order, options.max_order);
}

void patch_rule(const SurfaceElement& parent, const Patch& patch, int order, std::vector<QuadPoint>& out) {
    const GaussRule& g = gauss_legendre(order);
    const auto n = g.nodes.size();
    if (patch.shape == ElementShape::Quad) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const Param2 local(g.nodes[i], g.nodes[j]);
                const Param2 ref = patch.to_parent(local);
                const double w = g.weights[i] * g.weights[j] * patch.local_jacobian(local) * parent.jacobian(ref);
                out.push_back({parent.map(ref), ref, w});
            }
        return;
    }
    // collapsed tensor rule: xi = u (1 - v), eta = u v on [0,1]^2
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double u = 0.5 * (1.0 + g.nodes[i]);
            const double v = 0.5 * (1.0 + g.nodes[j]);
            const Param2 local(u * (1.0 - v), u * v);
            const Param2 ref = patch.to_parent(local);
            const double w = 0.25 * g.weights[i] * g.weights[j] * u * patch.local_jacobian(local) *
                             parent.jacobian(ref);
            out.push_back({parent.map(ref), ref, w});
        }
}

void banded_rule(const Point3& source, const SurfaceElement& parent, const Patch& patch,
                 const QuadratureOptions& options, std::vector<QuadPoint>& out) {
    const double rel = parent.diameter() / options.length_scale;
    banded(source, parent, patch, options, std::min(options.max_tolerance, options.tolerance * rel * rel * rel * rel), 0,
           out);
}

} // namespace rite
