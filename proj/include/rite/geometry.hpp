#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rite/errors.hpp"

namespace rite {

using Point3 = Eigen::Vector3d;
using Vector3 = Eigen::Vector3d;
using Param2 = Eigen::Vector2d;

enum class ElementShape { Triangle, Quad };

/// Reference coordinates of an element:
///   Quad      (xi, eta) in [-1, 1]^2, bilinear map through the four vertices.
///   Triangle  (xi, eta) with xi, eta >= 0, xi + eta <= 1, affine map.
class SurfaceElement {
public:
    SurfaceElement() = default;

    /// Validates and builds a flat element. The normal follows the right-hand
    /// rule on the vertex order.
    static SurfaceElement build(std::span<const Point3> vertices, double emissivity);

    ElementShape shape() const { return shape_; }
    int vertex_count() const { return shape_ == ElementShape::Quad ? 4 : 3; }
    const Point3& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    std::span<const Point3> vertices() const {
        return {vertices_.data(), static_cast<std::size_t>(vertex_count())};
    }
    const Vector3& normal() const { return normal_; }
    const Point3& centroid() const { return centroid_; }
    double area() const { return area_; }
    double diameter() const { return diameter_; }
    /// Largest centroid-to-vertex distance.
    double bounding_radius() const { return bounding_radius_; }
    double emissivity() const { return emissivity_; }

    Point3 map(const Param2& ref) const;
    /// Surface Jacobian |dx/dxi x dx/deta| at a reference point.
    double jacobian(const Param2& ref) const;
    /// Inverse of map() for a point on the element plane.
    Param2 reference_coordinates(const Point3& x) const;

    double signed_distance(const Point3& x) const { return normal_.dot(x - centroid_); }
    /// True if x lies on the element (plane and polygon) within tol.
    bool contains(const Point3& x, double tol) const;
    Point3 closest_point(const Point3& x) const;
    double distance(const Point3& x) const { return (closest_point(x) - x).norm(); }

private:
    bool inside_polygon(const Point3& x_on_plane, double tol) const;

    ElementShape shape_ = ElementShape::Triangle;
    std::array<Point3, 4> vertices_{};
    Vector3 normal_ = Vector3::UnitZ();
    Point3 centroid_ = Point3::Zero();
    double area_ = 0.0;
    double diameter_ = 0.0;
    double bounding_radius_ = 0.0;
    double emissivity_ = 1.0;
};

/// A region of an element's reference domain: a reference-space rectangle for
/// quads (corners in counter-clockwise order) or a reference-space triangle.
struct Patch {
    ElementShape shape = ElementShape::Quad;
    std::array<Param2, 4> corners{};

    static Patch whole(ElementShape shape);
    int corner_count() const { return shape == ElementShape::Quad ? 4 : 3; }
    /// Maps local patch coordinates (same convention as the element reference
    /// domain) to the parent's reference coordinates.
    Param2 to_parent(const Param2& local) const;
    /// |d parent_ref / d local|.
    double local_jacobian(const Param2& local) const;
    /// Split into four children: edge midpoints for triangles, (0, 0) for quads.
    std::array<Patch, 4> subdivide() const;
    /// Split at an interior point given in parent reference coordinates:
    /// three triangles or four rectangles sharing that point.
    std::vector<Patch> split_at(const Param2& parent_ref) const;
    bool contains(const Param2& parent_ref, double tol) const;
};

/// Physical geometry of a patch of the parent element.
SurfaceElement patch_geometry(const SurfaceElement& parent, const Patch& patch);

std::array<SurfaceElement, 4> subdivide4(const SurfaceElement& e);

struct Segment {
    Point3 start;
    Point3 end;

    double length() const { return (end - start).norm(); }
    Vector3 direction() const { return (end - start).normalized(); }
};

struct Hit {
    bool hit = false;
    double s = 0.0; ///< arclength from segment start
};

/// Open-segment test: intersections within 1e-10 * diameter of either
/// segment endpoint are not hits. Edges of the element count as hits.
Hit ray_intersect_element(const Segment& seg, const SurfaceElement& e);

struct VoxelSpan {
    int cell = 0;
    double s_enter = 0.0;
    double s_exit = 0.0;
};

class VoxelGrid {
public:
    VoxelGrid() = default;
    VoxelGrid(Point3 origin, Vector3 spacing, std::array<int, 3> dims);

    const Point3& origin() const { return origin_; }
    const Vector3& spacing() const { return spacing_; }
    const std::array<int, 3>& dims() const { return dims_; }
    int cell_count() const { return dims_[0] * dims_[1] * dims_[2]; }
    double cell_volume() const { return spacing_.prod(); }
    Point3 box_min() const { return origin_; }
    Point3 box_max() const;

    int index(int i, int j, int k) const { return i + dims_[0] * (j + dims_[1] * k); }
    std::array<int, 3> ijk(int cell) const;
    Point3 cell_center(int cell) const;
    /// Cell containing x, -1 outside the box. Points on shared faces go to
    /// the higher-index cell.
    int locate(const Point3& x) const;

    std::vector<double>& temperature() { return temperature_; }
    const std::vector<double>& temperature() const { return temperature_; }
    std::vector<double>& incident() { return incident_; }
    const std::vector<double>& incident() const { return incident_; }

private:
    Point3 origin_ = Point3::Zero();
    Vector3 spacing_ = Vector3::Ones();
    std::array<int, 3> dims_{1, 1, 1};
    std::vector<double> temperature_;
    std::vector<double> incident_;
};

/// Clips seg to the grid box and returns the sorted, disjoint spans of the
/// cells it passes through. Arclengths are measured from seg.start.
std::vector<VoxelSpan> traverse_voxels(const Segment& seg, const VoxelGrid& grid);

class SurfaceMesh {
public:
    SurfaceMesh() = default;
    SurfaceMesh(std::vector<Point3> nodes, std::vector<std::vector<int>> connectivity,
                std::vector<double> emissivity, std::vector<double> temperature);
    /// Element soup without node connectivity (open test scenes).
    static SurfaceMesh from_elements(std::vector<SurfaceElement> elements,
                                     std::vector<double> temperature = {});

    std::size_t size() const { return elements_.size(); }
    const SurfaceElement& element(std::size_t k) const { return elements_[k]; }
    const std::vector<SurfaceElement>& elements() const { return elements_; }
    const std::vector<Point3>& nodes() const { return nodes_; }
    const std::vector<std::vector<int>>& connectivity() const { return connectivity_; }
    const std::vector<double>& temperature() const { return temperature_; }
    double temperature(std::size_t k) const { return temperature_[k]; }

    /// Throws InvalidMesh unless every edge is shared by exactly two elements.
    void check_closed() const;
    /// Maximum vertex-to-vertex distance.
    double diameter() const;
    double min_emissivity() const;
    /// Solid-angle sum test; valid for closed meshes.
    bool encloses(const Point3& x) const;

private:
    std::vector<Point3> nodes_;
    std::vector<std::vector<int>> connectivity_;
    std::vector<SurfaceElement> elements_;
    std::vector<double> temperature_;
};

} // namespace rite
