#pragma once

#include <optional>
#include <vector>

#include "rite/geometry.hpp"

namespace rite {

/// A point radiation is evaluated from. Boundary points carry the unit
/// normal of their element; medium points carry none.
struct Source {
    Point3 point;
    std::optional<Vector3> normal;
};

struct SubdivisionBudget {
    double min_area_fraction = 1e-4; ///< smallest sub-element area / original element area
    int max_depth = 8;

    void validate() const;
};

struct VisibilityOptions {
    SubdivisionBudget budget;
    /// Cylinder and cone windows. They only reject elements that cannot
    /// intersect the viewing pyramid, so turning them off changes runtime only.
    bool culls = true;
};

/// Strict mutual facing test against the element centroid. Without a source
/// normal only the element side is checked.
bool facing_test(const Source& source, const SurfaceElement& e);

struct ActiveList {
    Source source;
    std::vector<int> elements;
};

ActiveList build_active_list(const Source& source, const SurfaceMesh& mesh);

struct BlockingList {
    Source source;
    int active = -1;
    std::vector<int> blockers;
    /// The active element cannot be seen from the source at all.
    bool early_blocked = false;
};

BlockingList build_blocking_list(const Source& source, int active, const SurfaceMesh& mesh,
                                 const VisibilityOptions& options = {});

enum class Visibility { FullyVisible, FullyBlocked, Partial };

struct VisiblePatch {
    Patch patch;               ///< region of the active element's reference domain
    SurfaceElement geometry;
    int depth = 0;
};

struct VisibilityReport {
    Visibility classification = Visibility::FullyVisible;
    std::vector<VisiblePatch> visible;
    double fraction = 1.0;
    int depth_reached = 0;
    int subdivisions = 0;
};

/// Quadtree refinement of the active element against its blocking list.
VisibilityReport classify_visibility(const Source& source, int active, const SurfaceMesh& mesh,
                                     const BlockingList& blocking, const VisibilityOptions& options = {});

/// Convenience: blocking list followed by classification.
VisibilityReport element_visibility(const Source& source, int active, const SurfaceMesh& mesh,
                                    const VisibilityOptions& options = {});

/// Shadow indicator: 1 if the open segment p-r meets no element.
int chi_point(const Point3& p, const Point3& r, const SurfaceMesh& mesh);

} // namespace rite
