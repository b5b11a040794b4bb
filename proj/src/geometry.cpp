#include "rite/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

namespace rite {

namespace {

constexpr double kPlanarityTol = 1e-9;
constexpr double kDegenerateAreaTol = 1e-14;
constexpr double kEndpointTol = 1e-10;
constexpr double kSnapTol = 1e-9;

Point3 closest_on_segment(const Point3& a, const Point3& b, const Point3& x) {
    const Vector3 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0)
        return a;
    const double t = std::clamp((x - a).dot(ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

} // namespace

SurfaceElement SurfaceElement::build(std::span<const Point3> vertices, double emissivity) {
    if (vertices.size() != 3 && vertices.size() != 4)
        throw DegenerateElement("element needs 3 or 4 vertices");
    if (!(emissivity > 0.0 && emissivity <= 1.0))
        throw InvalidMesh("element emissivity must lie in (0, 1]");
    for (const auto& v : vertices)
        if (!v.allFinite())
            throw DegenerateElement("non-finite element vertex");

    SurfaceElement e;
    e.shape_ = vertices.size() == 4 ? ElementShape::Quad : ElementShape::Triangle;
    e.emissivity_ = emissivity;
    const int n = e.vertex_count();
    for (int i = 0; i < n; ++i)
        e.vertices_[static_cast<std::size_t>(i)] = vertices[static_cast<std::size_t>(i)];

    double diam = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            diam = std::max(diam, (e.vertex(i) - e.vertex(j)).norm());
    e.diameter_ = diam;
    if (!(diam > 0.0))
        throw DegenerateElement("element has zero diameter");

    Vector3 cross;
    if (e.shape_ == ElementShape::Quad)
        cross = (e.vertex(2) - e.vertex(0)).cross(e.vertex(3) - e.vertex(1));
    else
        cross = (e.vertex(1) - e.vertex(0)).cross(e.vertex(2) - e.vertex(0));
    e.area_ = 0.5 * cross.norm();
    if (e.area_ <= kDegenerateAreaTol * diam * diam)
        throw DegenerateElement("element area below tolerance");
    e.normal_ = cross.normalized();

    Point3 mean = Point3::Zero();
    for (int i = 0; i < n; ++i)
        mean += e.vertex(i);
    mean /= n;
    e.centroid_ = mean;

    if (e.shape_ == ElementShape::Quad) {
        Eigen::Matrix<double, 4, 3> centered;
        for (int i = 0; i < 4; ++i)
            centered.row(i) = (e.vertex(i) - mean).transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(centered.transpose() * centered);
        const Vector3 plane_normal = eig.eigenvectors().col(0);
        const double deviation = (centered * plane_normal).cwiseAbs().maxCoeff();
        if (deviation > kPlanarityTol * diam) {
            std::ostringstream msg;
            msg << "quad deviates " << deviation << " m from its best-fit plane";
            throw NonPlanar(msg.str());
        }
        for (int i = 0; i < 4; ++i) {
            const Vector3 a = e.vertex((i + 1) % 4) - e.vertex(i);
            const Vector3 b = e.vertex((i + 2) % 4) - e.vertex((i + 1) % 4);
            if (a.cross(b).dot(e.normal_) <= kDegenerateAreaTol * diam * diam)
                throw DegenerateElement("quad is not strictly convex");
        }
    }

    double radius = 0.0;
    for (int i = 0; i < n; ++i)
        radius = std::max(radius, (e.vertex(i) - e.centroid_).norm());
    e.bounding_radius_ = radius;
    return e;
}

Point3 SurfaceElement::map(const Param2& ref) const {
    const double xi = ref.x();
    const double eta = ref.y();
    if (shape_ == ElementShape::Triangle)
        return vertex(0) + xi * (vertex(1) - vertex(0)) + eta * (vertex(2) - vertex(0));
    return 0.25 * ((1 - xi) * (1 - eta) * vertex(0) + (1 + xi) * (1 - eta) * vertex(1) +
                   (1 + xi) * (1 + eta) * vertex(2) + (1 - xi) * (1 + eta) * vertex(3));
}

double SurfaceElement::jacobian(const Param2& ref) const {
    if (shape_ == ElementShape::Triangle)
        return 2.0 * area_;
    const double xi = ref.x();
    const double eta = ref.y();
    const Vector3 dxi = 0.25 * ((1 - eta) * (vertex(1) - vertex(0)) + (1 + eta) * (vertex(2) - vertex(3)));
    const Vector3 deta = 0.25 * ((1 - xi) * (vertex(3) - vertex(0)) + (1 + xi) * (vertex(2) - vertex(1)));
    return dxi.cross(deta).norm();
}

Param2 SurfaceElement::reference_coordinates(const Point3& x) const {
    if (shape_ == ElementShape::Triangle) {
        Eigen::Matrix<double, 3, 2> jac;
        jac.col(0) = vertex(1) - vertex(0);
        jac.col(1) = vertex(2) - vertex(0);
        return (jac.transpose() * jac).ldlt().solve(jac.transpose() * (x - vertex(0)));
    }
    Param2 ref = Param2::Zero();
    for (int it = 0; it < 30; ++it) {
        const double xi = ref.x();
        const double eta = ref.y();
        Eigen::Matrix<double, 3, 2> jac;
        jac.col(0) = 0.25 * ((1 - eta) * (vertex(1) - vertex(0)) + (1 + eta) * (vertex(2) - vertex(3)));
        jac.col(1) = 0.25 * ((1 - xi) * (vertex(3) - vertex(0)) + (1 + xi) * (vertex(2) - vertex(1)));
        const Vector3 residual = map(ref) - x;
        const Param2 step = (jac.transpose() * jac).ldlt().solve(jac.transpose() * residual);
        ref -= step;
        if (step.norm() < 1e-15)
            break;
    }
    return ref;
}

bool SurfaceElement::inside_polygon(const Point3& x, double tol) const {
    const int n = vertex_count();
    for (int i = 0; i < n; ++i) {
        const Point3& a = vertex(i);
        const Vector3 edge = vertex((i + 1) % n) - a;
        if (edge.cross(x - a).dot(normal_) < -tol * edge.norm())
            return false;
    }
    return true;
}

bool SurfaceElement::contains(const Point3& x, double tol) const {
    const double dist = signed_distance(x);
    if (std::abs(dist) > tol)
        return false;
    return inside_polygon(x - dist * normal_, tol);
}

Point3 SurfaceElement::closest_point(const Point3& x) const {
    const Point3 projected = x - signed_distance(x) * normal_;
    if (inside_polygon(projected, 0.0))
        return projected;
    const int n = vertex_count();
    Point3 best = vertex(0);
    double best_d2 = (best - x).squaredNorm();
    for (int i = 0; i < n; ++i) {
        const Point3 c = closest_on_segment(vertex(i), vertex((i + 1) % n), x);
        const double d2 = (c - x).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = c;
        }
    }
    return best;
}

Patch Patch::whole(ElementShape shape) {
    Patch p;
    p.shape = shape;
    if (shape == ElementShape::Quad)
        p.corners = {Param2(-1, -1), Param2(1, -1), Param2(1, 1), Param2(-1, 1)};
    else
        p.corners = {Param2(0, 0), Param2(1, 0), Param2(0, 1), Param2(0, 0)};
    return p;
}

Param2 Patch::to_parent(const Param2& local) const {
    const double xi = local.x();
    const double eta = local.y();
    if (shape == ElementShape::Triangle)
        return corners[0] + xi * (corners[1] - corners[0]) + eta * (corners[2] - corners[0]);
    return 0.25 * ((1 - xi) * (1 - eta) * corners[0] + (1 + xi) * (1 - eta) * corners[1] +
                   (1 + xi) * (1 + eta) * corners[2] + (1 - xi) * (1 + eta) * corners[3]);
}

double Patch::local_jacobian(const Param2& local) const {
    Eigen::Matrix2d jac;
    if (shape == ElementShape::Triangle) {
        jac.col(0) = corners[1] - corners[0];
        jac.col(1) = corners[2] - corners[0];
    } else {
        const double xi = local.x();
        const double eta = local.y();
        jac.col(0) = 0.25 * ((1 - eta) * (corners[1] - corners[0]) + (1 + eta) * (corners[2] - corners[3]));
        jac.col(1) = 0.25 * ((1 - xi) * (corners[3] - corners[0]) + (1 + xi) * (corners[2] - corners[1]));
    }
    return std::abs(jac.determinant());
}

std::array<Patch, 4> Patch::subdivide() const {
    std::array<Patch, 4> out;
    for (auto& c : out)
        c.shape = shape;
    if (shape == ElementShape::Triangle) {
        const Param2 &a = corners[0], &b = corners[1], &c = corners[2];
        const Param2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
        out[0].corners = {a, ab, ca, a};
        out[1].corners = {ab, b, bc, ab};
        out[2].corners = {ca, bc, c, ca};
        out[3].corners = {ab, bc, ca, ab};
        return out;
    }
    const Param2 m01 = to_parent(Param2(0, -1)), m12 = to_parent(Param2(1, 0));
    const Param2 m23 = to_parent(Param2(0, 1)), m30 = to_parent(Param2(-1, 0));
    const Param2 mid = to_parent(Param2(0, 0));
    out[0].corners = {corners[0], m01, mid, m30};
    out[1].corners = {m01, corners[1], m12, mid};
    out[2].corners = {mid, m12, corners[2], m23};
    out[3].corners = {m30, mid, m23, corners[3]};
    return out;
}

std::vector<Patch> Patch::split_at(const Param2& f) const {
    std::vector<Patch> out;
    if (shape == ElementShape::Triangle) {
        for (int i = 0; i < 3; ++i) {
            Patch child;
            child.shape = ElementShape::Triangle;
            child.corners = {corners[static_cast<std::size_t>(i)],
                             corners[static_cast<std::size_t>((i + 1) % 3)], f, f};
            out.push_back(child);
        }
        return out;
    }
    // quad patches are axis-aligned rectangles in reference space
    const double x0 = corners[0].x(), x1 = corners[2].x();
    const double y0 = corners[0].y(), y1 = corners[2].y();
    const std::array<std::pair<double, double>, 2> xs{{{x0, f.x()}, {f.x(), x1}}};
    const std::array<std::pair<double, double>, 2> ys{{{y0, f.y()}, {f.y(), y1}}};
    for (const auto& [ya, yb] : ys)
        for (const auto& [xa, xb] : xs) {
            Patch child;
            child.shape = ElementShape::Quad;
            child.corners = {Param2(xa, ya), Param2(xb, ya), Param2(xb, yb), Param2(xa, yb)};
            out.push_back(child);
        }
    return out;
}

bool Patch::contains(const Param2& f, double tol) const {
    const int n = corner_count();
    for (int i = 0; i < n; ++i) {
        const Param2 a = corners[static_cast<std::size_t>(i)];
        const Param2 b = corners[static_cast<std::size_t>((i + 1) % n)];
        const Param2 e = b - a;
        const Param2 d = f - a;
        if (e.x() * d.y() - e.y() * d.x() < -tol * e.norm())
            return false;
    }
    return true;
}

SurfaceElement patch_geometry(const SurfaceElement& parent, const Patch& patch) {
    std::array<Point3, 4> pts;
    const int n = patch.corner_count();
    for (int i = 0; i < n; ++i)
        pts[static_cast<std::size_t>(i)] = parent.map(patch.corners[static_cast<std::size_t>(i)]);
    return SurfaceElement::build(std::span<const Point3>(pts.data(), static_cast<std::size_t>(n)),
                                 parent.emissivity());
}

std::array<SurfaceElement, 4> subdivide4(const SurfaceElement& e) {
    const auto children = Patch::whole(e.shape()).subdivide();
    return {patch_geometry(e, children[0]), patch_geometry(e, children[1]),
            patch_geometry(e, children[2]), patch_geometry(e, children[3])};
}

Hit ray_intersect_element(const Segment& seg, const SurfaceElement& e) {
    const Vector3 d = seg.end - seg.start;
    const double len = d.norm();
    if (len == 0.0)
        return {};
    const double da = e.signed_distance(seg.start);
    const double db = e.signed_distance(seg.end);
    const double denom = da - db;
    if (std::abs(denom) <= 1e-14 * len)
        return {};
    const double t = da / denom;
    const double s = t * len;
    const double tol = kEndpointTol * e.diameter();
    if (!(s > tol && s < len - tol))
        return {};
    const Point3 x = seg.start + t * d;
    if (!e.contains(x, tol))
        return {};
    return {true, s};
}

VoxelGrid::VoxelGrid(Point3 origin, Vector3 spacing, std::array<int, 3> dims)
    : origin_(std::move(origin)), spacing_(std::move(spacing)), dims_(dims) {
    if (!(spacing_.minCoeff() > 0.0))
        throw InvalidMesh("grid spacing must be positive");
    if (dims_[0] < 1 || dims_[1] < 1 || dims_[2] < 1)
        throw InvalidMesh("grid dimensions must be positive");
    temperature_.assign(static_cast<std::size_t>(cell_count()), 0.0);
    incident_.assign(static_cast<std::size_t>(cell_count()), 0.0);
}

Point3 VoxelGrid::box_max() const {
    return origin_ + spacing_.cwiseProduct(Vector3(dims_[0], dims_[1], dims_[2]));
}

std::array<int, 3> VoxelGrid::ijk(int cell) const {
    const int i = cell % dims_[0];
    const int j = (cell / dims_[0]) % dims_[1];
    const int k = cell / (dims_[0] * dims_[1]);
    return {i, j, k};
}

Point3 VoxelGrid::cell_center(int cell) const {
    const auto [i, j, k] = ijk(cell);
    return origin_ + spacing_.cwiseProduct(Vector3(i + 0.5, j + 0.5, k + 0.5));
}

int VoxelGrid::locate(const Point3& x) const {
    std::array<int, 3> idx{};
    for (int a = 0; a < 3; ++a) {
        double u = (x[a] - origin_[a]) / spacing_[a];
        const double r = std::round(u);
        if (std::abs(u - r) <= kSnapTol)
            u = r;
        int m = static_cast<int>(std::floor(u));
        if (m == dims_[static_cast<std::size_t>(a)] && u <= dims_[static_cast<std::size_t>(a)])
            m = dims_[static_cast<std::size_t>(a)] - 1;
        if (m < 0 || m >= dims_[static_cast<std::size_t>(a)])
            return -1;
        idx[static_cast<std::size_t>(a)] = m;
    }
    return index(idx[0], idx[1], idx[2]);
}

std::vector<VoxelSpan> traverse_voxels(const Segment& seg, const VoxelGrid& grid) {
    const Vector3 d = seg.end - seg.start;
    const double len = d.norm();
    const Point3 lo = grid.box_min();
    const Point3 hi = grid.box_max();
    const double box_tol = kSnapTol * grid.spacing().minCoeff();

    double t_in = 0.0;
    double t_out = 1.0;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) <= 1e-15 * std::max(len, 1.0)) {
            if (seg.start[a] < lo[a] - box_tol || seg.start[a] > hi[a] + box_tol)
                throw OutsideGrid("segment lies outside the grid box");
            continue;
        }
        double t1 = (lo[a] - seg.start[a]) / d[a];
        double t2 = (hi[a] - seg.start[a]) / d[a];
        if (t1 > t2)
            std::swap(t1, t2);
        t_in = std::max(t_in, t1);
        t_out = std::min(t_out, t2);
    }
    if (len == 0.0 || t_out - t_in <= 1e-14)
        throw OutsideGrid("segment lies outside the grid box");

    thread_local std::vector<double> cuts;
    cuts.clear();
    cuts.push_back(t_in);
    cuts.push_back(t_out);
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0)
            continue;
        const int n = grid.dims()[static_cast<std::size_t>(a)];
        for (int m = 1; m < n; ++m) {
            const double plane = lo[a] + m * grid.spacing()[a];
            const double t = (plane - seg.start[a]) / d[a];
            if (t > t_in && t < t_out)
                cuts.push_back(t);
        }
    }
    std::sort(cuts.begin(), cuts.end());

    std::vector<VoxelSpan> spans;
    double prev = cuts.front();
    for (std::size_t c = 1; c < cuts.size(); ++c) {
        const double next = cuts[c];
        if (next - prev <= 1e-13 && c + 1 < cuts.size())
            continue;
        if (next <= prev)
            continue;
        const Point3 mid = seg.start + (0.5 * (prev + next)) * d;
        const int cell = grid.locate(mid);
        if (cell >= 0) {
            if (!spans.empty() && spans.back().cell == cell)
                spans.back().s_exit = next * len;
            else
                spans.push_back({cell, prev * len, next * len});
        }
        prev = next;
    }
    if (spans.empty())
        throw OutsideGrid("segment lies outside the grid box");
    return spans;
}

SurfaceMesh::SurfaceMesh(std::vector<Point3> nodes, std::vector<std::vector<int>> connectivity,
                         std::vector<double> emissivity, std::vector<double> temperature)
    : nodes_(std::move(nodes)), connectivity_(std::move(connectivity)),
      temperature_(std::move(temperature)) {
    if (emissivity.size() != connectivity_.size() || temperature_.size() != connectivity_.size())
        throw InvalidMesh("per-element emissivity/temperature size mismatch");
    elements_.reserve(connectivity_.size());
    for (std::size_t k = 0; k < connectivity_.size(); ++k) {
        const auto& conn = connectivity_[k];
        std::vector<Point3> pts;
        for (int idx : conn) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= nodes_.size())
                throw InvalidMesh("element references unknown node");
            pts.push_back(nodes_[static_cast<std::size_t>(idx)]);
        }
        elements_.push_back(SurfaceElement::build(pts, emissivity[k]));
        if (!(temperature_[k] >= 0.0))
            throw InvalidMesh("element temperature must be non-negative");
    }
}

SurfaceMesh SurfaceMesh::from_elements(std::vector<SurfaceElement> elements,
                                       std::vector<double> temperature) {
    SurfaceMesh mesh;
    if (temperature.empty())
        temperature.assign(elements.size(), 0.0);
    if (temperature.size() != elements.size())
        throw InvalidMesh("per-element temperature size mismatch");
    mesh.elements_ = std::move(elements);
    mesh.temperature_ = std::move(temperature);
    return mesh;
}

void SurfaceMesh::check_closed() const {
    if (connectivity_.size() != elements_.size())
        throw InvalidMesh("closure check needs node connectivity");
    std::map<std::pair<int, int>, int> edges;
    for (const auto& conn : connectivity_) {
        const std::size_t n = conn.size();
        for (std::size_t i = 0; i < n; ++i) {
            int a = conn[i];
            int b = conn[(i + 1) % n];
            if (a > b)
                std::swap(a, b);
            ++edges[{a, b}];
        }
    }
    for (const auto& [edge, count] : edges)
        if (count != 2) {
            std::ostringstream msg;
            msg << "mesh is not closed: edge (" << edge.first << ", " << edge.second << ") is shared by "
                << count << " element(s)";
            throw InvalidMesh(msg.str());
        }
}

double SurfaceMesh::diameter() const {
    std::vector<Point3> pts = nodes_;
    if (pts.empty())
        for (const auto& e : elements_)
            for (const auto& v : e.vertices())
                pts.push_back(v);
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            best = std::max(best, (pts[i] - pts[j]).squaredNorm());
    return std::sqrt(best);
}

double SurfaceMesh::min_emissivity() const {
    double eps = 1.0;
    for (const auto& e : elements_)
        eps = std::min(eps, e.emissivity());
    return eps;
}

bool SurfaceMesh::encloses(const Point3& x) const {
    auto solid_angle = [&](const Point3& a0, const Point3& b0, const Point3& c0) {
        const Vector3 a = a0 - x, b = b0 - x, c = c0 - x;
        const double la = a.norm(), lb = b.norm(), lc = c.norm();
        const double num = a.dot(b.cross(c));
        const double den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
        return 2.0 * std::atan2(num, den);
    };
    double total = 0.0;
    for (const auto& e : elements_) {
        total += solid_angle(e.vertex(0), e.vertex(1), e.vertex(2));
        if (e.shape() == ElementShape::Quad)
            total += solid_angle(e.vertex(0), e.vertex(2), e.vertex(3));
    }
    return std::abs(total) > 2.0 * std::numbers::pi;
}

} // namespace rite
