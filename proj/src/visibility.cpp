#include "rite/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rite {

namespace {

constexpr double kFacingTol = 1e-12;
constexpr double kIncidentTol = 1e-9;
constexpr double kSeparationTol = 1e-9;

enum class BlockerTest { Skip, Add, FullyCovers };

bool incident(const Point3& p, const SurfaceElement& e) { return e.contains(p, kIncidentTol * e.diameter()); }

bool coplanar(const SurfaceElement& a, const SurfaceElement& b) {
    if (std::abs(a.normal().dot(b.normal())) < 1.0 - 1e-12)
        return false;
    const double tol = kIncidentTol * std::max(a.diameter(), b.diameter());
    return std::abs(a.signed_distance(b.centroid())) <= tol;
}

bool outside_windows(const Point3& p, const SurfaceElement& target, const SurfaceElement& blocker) {
    const Vector3 axis_full = target.centroid() - p;
    const double height = axis_full.norm();
    const Vector3 axis = axis_full / height;

    double reach = 0.0;
    double cos_half = 1.0;
    for (const auto& v : target.vertices()) {
        const Vector3 w = v - p;
        const double along = w.dot(axis);
        reach = std::max(reach, along);
        cos_half = std::min(cos_half, along / w.norm());
    }

    // cylinder around the source-centroid axis
    const Vector3 c = blocker.centroid() - p;
    const double along = c.dot(axis);
    const double perp = (c - along * axis).norm();
    const double rb = blocker.bounding_radius();
    if (perp > target.bounding_radius() + rb || along < -rb || along > reach + rb)
        return true;

    // cone with apex at the source enclosing every target vertex
    const double half = std::acos(std::clamp(cos_half, -1.0, 1.0));
    const double phi = std::atan2(perp, along);
    if (phi <= half)
        return false;
    const double gap = phi - half;
    const double dist = gap >= 0.5 * std::numbers::pi ? c.norm() : c.norm() * std::sin(gap);
    return dist > rb;
}

/// Separating-axis test between the pyramid conv(p, target) and the convex
/// blocker polygon. Contacts within tolerance count as separated.
bool pyramid_overlaps(const Point3& p, const SurfaceElement& target, const SurfaceElement& blocker) {
    std::array<Point3, 5> pyr;
    const int nt = target.vertex_count();
    pyr[0] = p;
    for (int i = 0; i < nt; ++i)
        pyr[static_cast<std::size_t>(i + 1)] = target.vertex(i);
    const int np = nt + 1;
    const int nb = blocker.vertex_count();

    const double scale = std::max({(target.centroid() - p).norm(), target.diameter(), blocker.diameter()});
    const double tol = kSeparationTol * scale;

    auto separated_on = [&](Vector3 axis) {
        const double len = axis.norm();
        if (len <= 1e-12)
            return false;
        axis /= len;
        double amin = axis.dot(pyr[0]), amax = amin;
        for (int i = 1; i < np; ++i) {
            const double v = axis.dot(pyr[static_cast<std::size_t>(i)]);
            amin = std::min(amin, v);
            amax = std::max(amax, v);
        }
        double bmin = axis.dot(blocker.vertex(0)), bmax = bmin;
        for (int i = 1; i < nb; ++i) {
            const double v = axis.dot(blocker.vertex(i));
            bmin = std::min(bmin, v);
            bmax = std::max(bmax, v);
        }
        return amax <= bmin + tol || bmax <= amin + tol;
    };

    if (separated_on(target.normal()) || separated_on(blocker.normal()))
        return false;

    std::array<Vector3, 8> pyr_edges;
    int ne = 0;
    for (int i = 0; i < nt; ++i) {
        const Point3& a = target.vertex(i);
        const Point3& b = target.vertex((i + 1) % nt);
        pyr_edges[static_cast<std::size_t>(ne++)] = a - p;
        pyr_edges[static_cast<std::size_t>(ne++)] = b - a;
        if (separated_on((a - p).cross(b - p)))
            return false;
    }
    for (int i = 0; i < ne; ++i) {
        const Vector3 unit = pyr_edges[static_cast<std::size_t>(i)].normalized();
        for (int j = 0; j < nb; ++j) {
            const Vector3 eb = (blocker.vertex((j + 1) % nb) - blocker.vertex(j)).normalized();
            if (separated_on(unit.cross(eb)))
                return false;
        }
    }
    return true;
}

BlockerTest test_blocker(const Point3& p, const SurfaceElement& target, const SurfaceElement& blocker,
                         bool culls) {
    if (culls && outside_windows(p, target, blocker))
        return BlockerTest::Skip;
    if (!pyramid_overlaps(p, target, blocker))
        return BlockerTest::Skip;
    if (ray_intersect_element({p, target.centroid()}, blocker).hit) {
        bool all = true;
        for (const auto& v : target.vertices())
            if (!ray_intersect_element({p, v}, blocker).hit) {
                all = false;
                break;
            }
        if (all)
            return BlockerTest::FullyCovers;
    }
    return BlockerTest::Add;
}

bool union_blocked(const Point3& p, const SurfaceElement& target, const std::vector<int>& list,
                   const SurfaceMesh& mesh) {
    for (const auto& v : target.vertices()) {
        bool hit = false;
        for (int j : list)
            if (ray_intersect_element({p, v}, mesh.element(static_cast<std::size_t>(j))).hit) {
                hit = true;
                break;
            }
        if (!hit)
            return false;
    }
    return true;
}

struct FilterResult {
    bool blocked = false;
    std::vector<int> list;
};

FilterResult filter_blockers(const Point3& p, const SurfaceElement& target, const std::vector<int>& candidates,
                             const SurfaceMesh& mesh, bool culls) {
    FilterResult out;
    for (int j : candidates) {
        switch (test_blocker(p, target, mesh.element(static_cast<std::size_t>(j)), culls)) {
        case BlockerTest::Skip:
            break;
        case BlockerTest::Add:
            out.list.push_back(j);
            break;
        case BlockerTest::FullyCovers:
            out.blocked = true;
            out.list.clear();
            return out;
        }
    }
    if (!out.list.empty() && union_blocked(p, target, out.list, mesh))
        out.blocked = true;
    return out;
}

class Refiner {
public:
    Refiner(const Point3& p, const SurfaceElement& parent, const SurfaceMesh& mesh, const VisibilityOptions& opt,
            VisibilityReport& report)
        : p_(p), parent_(parent), mesh_(mesh), opt_(opt), report_(report),
          min_area_(opt.budget.min_area_fraction * parent.area()) {}

    double blocked_area = 0.0;

    void refine(const Patch& patch, const SurfaceElement& geom, const std::vector<int>& list, int depth) {
        report_.depth_reached = std::max(report_.depth_reached, depth);
        if (depth >= opt_.budget.max_depth || geom.area() <= min_area_) {
            bool hit = false;
            for (int j : list)
                if (ray_intersect_element({p_, geom.centroid()}, mesh_.element(static_cast<std::size_t>(j))).hit) {
                    hit = true;
                    break;
                }
            if (hit)
                blocked_area += geom.area();
            else
                report_.visible.push_back({patch, geom, depth});
            return;
        }
        ++report_.subdivisions;
        for (const auto& child : patch.subdivide()) {
            SurfaceElement child_geom = patch_geometry(parent_, child);
            FilterResult f = filter_blockers(p_, child_geom, list, mesh_, opt_.culls);
            report_.depth_reached = std::max(report_.depth_reached, depth + 1);
            if (f.blocked)
                blocked_area += child_geom.area();
            else if (f.list.empty())
                report_.visible.push_back({child, std::move(child_geom), depth + 1});
            else
                refine(child, child_geom, f.list, depth + 1);
        }
    }

private:
    const Point3& p_;
    const SurfaceElement& parent_;
    const SurfaceMesh& mesh_;
    const VisibilityOptions& opt_;
    VisibilityReport& report_;
    double min_area_;
};

} // namespace

void SubdivisionBudget::validate() const {
    if (!(min_area_fraction > 0.0))
        throw ConfigError("minimum sub-element area must be positive");
    if (max_depth < 1)
        throw ConfigError("maximum subdivision depth must be at least 1");
}

bool facing_test(const Source& source, const SurfaceElement& e) {
    const double tol = kFacingTol * e.diameter();
    const double d2 = e.normal().dot(source.point - e.centroid());
    if (!(d2 > tol))
        return false;
    if (source.normal) {
        const double d1 = source.normal->dot(e.centroid() - source.point);
        if (!(d1 > tol))
            return false;
    }
    return true;
}

ActiveList build_active_list(const Source& source, const SurfaceMesh& mesh) {
    ActiveList out{source, {}};
    for (std::size_t k = 0; k < mesh.size(); ++k) {
        const auto& e = mesh.element(k);
        if (incident(source.point, e))
            continue;
        if (facing_test(source, e))
            out.elements.push_back(static_cast<int>(k));
    }
    return out;
}

BlockingList build_blocking_list(const Source& source, int active, const SurfaceMesh& mesh,
                                 const VisibilityOptions& options) {
    BlockingList out{source, active, {}, false};
    const auto& target = mesh.element(static_cast<std::size_t>(active));
    for (std::size_t j = 0; j < mesh.size(); ++j) {
        if (static_cast<int>(j) == active)
            continue;
        const auto& blocker = mesh.element(j);
        if (incident(source.point, blocker) || coplanar(target, blocker))
            continue;
        switch (test_blocker(source.point, target, blocker, options.culls)) {
        case BlockerTest::Skip:
            break;
        case BlockerTest::Add:
            out.blockers.push_back(static_cast<int>(j));
            break;
        case BlockerTest::FullyCovers:
            out.early_blocked = true;
            out.blockers.clear();
            return out;
        }
    }
    if (!out.blockers.empty() && union_blocked(source.point, target, out.blockers, mesh)) {
        out.early_blocked = true;
        out.blockers.clear();
    }
    return out;
}

VisibilityReport classify_visibility(const Source& source, int active, const SurfaceMesh& mesh,
                                     const BlockingList& blocking, const VisibilityOptions& options) {
    options.budget.validate();
    const auto& element = mesh.element(static_cast<std::size_t>(active));
    VisibilityReport report;
    if (blocking.early_blocked) {
        report.classification = Visibility::FullyBlocked;
        report.fraction = 0.0;
        return report;
    }
    const Patch whole = Patch::whole(element.shape());
    if (blocking.blockers.empty()) {
        report.visible.push_back({whole, element, 0});
        return report;
    }

    Refiner refiner(source.point, element, mesh, options, report);
    refiner.refine(whole, element, blocking.blockers, 0);

    double visible_area = 0.0;
    for (const auto& v : report.visible)
        visible_area += v.geometry.area();
    if (report.visible.empty()) {
        report.classification = Visibility::FullyBlocked;
        report.fraction = 0.0;
    } else if (refiner.blocked_area == 0.0) {
        report.classification = Visibility::FullyVisible;
        report.fraction = 1.0;
    } else {
        report.classification = Visibility::Partial;
        report.fraction = std::clamp(visible_area / element.area(), 0.0, 1.0);
    }
    return report;
}

VisibilityReport element_visibility(const Source& source, int active, const SurfaceMesh& mesh,
                                    const VisibilityOptions& options) {
    return classify_visibility(source, active, mesh, build_blocking_list(source, active, mesh, options), options);
}

int chi_point(const Point3& p, const Point3& r, const SurfaceMesh& mesh) {
    if (p == r)
        throw CoincidentPoints("shadow indicator needs distinct points");
    const Segment seg{p, r};
    const Point3 lo = p.cwiseMin(r);
    const Point3 hi = p.cwiseMax(r);
    for (const auto& e : mesh.elements()) {
        bool disjoint = false;
        for (int a = 0; a < 3 && !disjoint; ++a) {
            double emin = e.vertex(0)[a], emax = emin;
            for (const auto& v : e.vertices()) {
                emin = std::min(emin, v[a]);
                emax = std::max(emax, v[a]);
            }
            const double tol = 1e-9 * e.diameter();
            disjoint = emax < lo[a] - tol || emin > hi[a] + tol;
        }
        if (!disjoint && ray_intersect_element(seg, e).hit)
            return 0;
    }
    return 1;
}

} // namespace rite
