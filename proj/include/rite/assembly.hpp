#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rite/geometry.hpp"
#include "rite/kernels.hpp"
#include "rite/quadrature.hpp"
#include "rite/visibility.hpp"

namespace rite {

/// Discontinuous interpolation: each element carries its own nodes at
/// interior Gauss positions, so every collocation point is a smooth point of S.
int shape_count(ElementShape shape);
Param2 shape_node(ElementShape shape, int alpha);
double shape_value(ElementShape shape, int alpha, const Param2& ref);

struct BoundaryPoint {
    Point3 point;
    Vector3 normal;
    int element = 0;
    int local = 0;
    Param2 ref;
    double weight = 0.0; ///< integral of the node's shape function over its element
};

struct CollocationSet {
    std::vector<BoundaryPoint> boundary;  ///< one per surface unknown
    std::vector<int> element_offset;      ///< first unknown of each element
    std::vector<Point3> interior;         ///< medium cell centres
    std::vector<int> medium_cells;        ///< grid cell of each interior point
    std::vector<int> cell_to_medium;      ///< -1 for cells outside the medium

    int boundary_count() const { return static_cast<int>(boundary.size()); }
    int interior_count() const { return static_cast<int>(interior.size()); }
};

CollocationSet collocation_points(const SurfaceMesh& mesh, const VoxelGrid& grid);

/// Rows are boundary collocation points. G acts on q, F on the medium G.
struct SurfaceSystem {
    Eigen::MatrixXd G;
    Eigen::MatrixXd F;
    Eigen::VectorXd h;
};

/// Rows are medium cells. U acts on G, V on q.
struct VolumeSystem {
    Eigen::MatrixXd U;
    Eigen::MatrixXd V;
    Eigen::VectorXd t;
};

struct AssemblyOptions {
    VisibilityOptions visibility;
    QuadratureOptions quadrature;
    int threads = 1;
};

/// One (collocation point, active element) visibility outcome. Interior
/// points are numbered after the boundary points.
struct VisibilityRecord {
    int point;
    int element;
    double fraction;
    int depth;
};

/// Integral of F_alpha (or 1) times a kernel over the part of element e that
/// is visible from the source. Zero when e does not face the source.
double element_integral(const Source& source, int element, const SurfaceMesh& mesh, KernelKind kind,
                        std::optional<int> alpha, const RadiativeProperties& props,
                        const AssemblyOptions& options = {});

SurfaceSystem assemble_surface(const SurfaceMesh& mesh, const VoxelGrid& grid, const RadiativeProperties& props,
                               const CollocationSet& colloc, const AssemblyOptions& options = {},
                               std::vector<VisibilityRecord>* records = nullptr);

VolumeSystem assemble_volume(const SurfaceMesh& mesh, const VoxelGrid& grid, const RadiativeProperties& props,
                             const CollocationSet& colloc, const AssemblyOptions& options = {},
                             std::vector<VisibilityRecord>* records = nullptr);

/// Volume rows at arbitrary medium points: G(x) = U G + V q + t.
VolumeSystem assemble_volume_rows(const SurfaceMesh& mesh, const VoxelGrid& grid, const RadiativeProperties& props,
                                  const CollocationSet& colloc, const std::vector<Point3>& points,
                                  const AssemblyOptions& options = {},
                                  std::vector<VisibilityRecord>* records = nullptr);

struct RowSumReport {
    std::array<double, 4> row_sum{};  ///< max absolute row sums of K1..K4
    std::array<double, 4> bound{};
    std::array<bool, 4> within{};
    double tolerance = 0.02;

    bool all_within() const { return within[0] && within[1] && within[2] && within[3]; }
};

/// Max absolute row sums of the four blocks against the operator norm bounds
/// eps_max (1 - eps_min) / eps_min, eps sigma_s / (4 beta), (sigma_s / beta)(1 - exp(-beta R)),
/// 4 (1 - eps) / eps. Non-uniform emissivity uses the extreme values.
RowSumReport operator_row_sums(const SurfaceSystem& surface, const VolumeSystem& volume,
                               const RadiativeProperties& props, double eps_min, double eps_max,
                               double tolerance = 0.02);

/// Little-endian binary block: "RITEBLK1", uint64 rows, uint64 cols, then
/// rows*cols float64 values in row-major order.
void write_block(const std::string& path, const Eigen::MatrixXd& block);
Eigen::MatrixXd read_block(const std::string& path);

} // namespace rite
