#include "rite/assembly.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <thread>

namespace rite {

namespace {

const double kNodeA = 1.0 / std::sqrt(3.0);
constexpr double kIncidentTol = 1e-9;
constexpr double kCoincidentTol = 1e-12;

struct Sample {
    int element;
    QuadPoint q;
};

int resolve_threads(int requested, int rows) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    return std::clamp(n, 1, std::max(rows, 1));
}

/// Runs fn(row) for every row. Rows are independent, so the result does not
/// depend on the thread count.
template <typename Fn>
void parallel_rows(int rows, int threads, Fn&& fn) {
    const int n = resolve_threads(threads, rows);
    if (n == 1) {
        for (int r = 0; r < rows; ++r)
            fn(r);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
        pool.emplace_back([&] {
            for (int r = next++; r < rows; r = next++) {
                try {
                    fn(r);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next = rows;
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

void visible_samples(const Source& src, const SurfaceMesh& mesh, const AssemblyOptions& opt, int point_id,
                     std::vector<Sample>& out, std::vector<VisibilityRecord>* records) {
    out.clear();
    const ActiveList active = build_active_list(src, mesh);
    std::vector<QuadPoint> pts;
    for (int k : active.elements) {
        const VisibilityReport rep = element_visibility(src, k, mesh, opt.visibility);
        if (records)
            records->push_back({point_id, k, rep.fraction, rep.depth_reached});
        const auto& e = mesh.element(static_cast<std::size_t>(k));
        for (const auto& vp : rep.visible) {
            pts.clear();
            banded_rule(src.point, e, vp.patch, opt.quadrature, pts);
            for (const auto& q : pts)
                out.push_back({k, q});
        }
    }
}

std::vector<double> blackbody_intensity(const VoxelGrid& grid, double sigma) {
    std::vector<double> ib(static_cast<std::size_t>(grid.cell_count()), 0.0);
    const auto& temp = grid.temperature();
    if (temp.size() == ib.size())
        for (std::size_t c = 0; c < ib.size(); ++c)
            ib[c] = blackbody(temp[c], sigma).intensity;
    return ib;
}

bool any_nonzero(const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; });
}

void check_row(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b, double rhs,
               int row, const char* what) {
    if (!a.row(row).allFinite() || !b.row(row).allFinite() || !std::isfinite(rhs))
        throw AssemblyFailure(std::string("non-finite entry in ") + what + " row " + std::to_string(row));
}

void flatten(std::vector<std::vector<VisibilityRecord>>& per_row, int offset, std::vector<VisibilityRecord>* out) {
    if (!out)
        return;
    for (auto& row : per_row)
        for (auto rec : row) {
            rec.point += offset;
            out->push_back(rec);
        }
}

AssemblyOptions scaled(AssemblyOptions options, const RadiativeProperties& props) {
    options.quadrature.length_scale = props.domain_diameter;
    return options;
}

} // namespace

int shape_count(ElementShape shape) { return shape == ElementShape::Quad ? 4 : 3; }

Param2 shape_node(ElementShape shape, int alpha) {
    if (shape == ElementShape::Quad) {
        static const std::array<Param2, 4> nodes{Param2(-kNodeA, -kNodeA), Param2(kNodeA, -kNodeA),
                                                 Param2(kNodeA, kNodeA), Param2(-kNodeA, kNodeA)};
        return nodes[static_cast<std::size_t>(alpha)];
    }
    static const std::array<Param2, 3> nodes{Param2(1.0 / 6, 1.0 / 6), Param2(2.0 / 3, 1.0 / 6),
                                             Param2(1.0 / 6, 2.0 / 3)};
    return nodes[static_cast<std::size_t>(alpha)];
}

double shape_value(ElementShape shape, int alpha, const Param2& ref) {
    if (shape == ElementShape::Quad) {
        const Param2 node = shape_node(shape, alpha);
        const double lx = (kNodeA + std::copysign(1.0, node.x()) * ref.x()) / (2 * kNodeA);
        const double ly = (kNodeA + std::copysign(1.0, node.y()) * ref.y()) / (2 * kNodeA);
        return lx * ly;
    }
    const std::array<double, 3> area{1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
    return 2.0 * area[static_cast<std::size_t>(alpha)] - 1.0 / 3.0;
}

CollocationSet collocation_points(const SurfaceMesh& mesh, const VoxelGrid& grid) {
    CollocationSet set;
    std::vector<QuadPoint> pts;
    for (std::size_t k = 0; k < mesh.size(); ++k) {
        const auto& e = mesh.element(k);
        set.element_offset.push_back(set.boundary_count());
        pts.clear();
        patch_rule(e, Patch::whole(e.shape()), 4, pts);
        for (int a = 0; a < shape_count(e.shape()); ++a) {
            BoundaryPoint b;
            b.ref = shape_node(e.shape(), a);
            b.point = e.map(b.ref);
            b.normal = e.normal();
            b.element = static_cast<int>(k);
            b.local = a;
            for (const auto& q : pts)
                b.weight += shape_value(e.shape(), a, q.ref) * q.weight;
            set.boundary.push_back(b);
        }
    }
    set.cell_to_medium.assign(static_cast<std::size_t>(grid.cell_count()), -1);
    for (int c = 0; c < grid.cell_count(); ++c) {
        const Point3 x = grid.cell_center(c);
        if (!mesh.encloses(x))
            continue;
        set.cell_to_medium[static_cast<std::size_t>(c)] = set.interior_count();
        set.interior.push_back(x);
        set.medium_cells.push_back(c);
    }
    return set;
}

double element_integral(const Source& source, int element, const SurfaceMesh& mesh, KernelKind kind,
                        std::optional<int> alpha, const RadiativeProperties& props, const AssemblyOptions& opts) {
    const AssemblyOptions options = scaled(opts, props);
    if (needs_source_normal(kind) && !source.normal)
        throw Error("kernel needs a source normal");
    const auto& e = mesh.element(static_cast<std::size_t>(element));
    if (e.contains(source.point, kIncidentTol * e.diameter()) || !facing_test(source, e))
        return 0.0;
    const VisibilityReport rep = element_visibility(source, element, mesh, options.visibility);
    const double r_min = kCoincidentTol * props.domain_diameter;
    std::vector<QuadPoint> pts;
    double sum = 0.0;
    for (const auto& vp : rep.visible) {
        pts.clear();
        banded_rule(source.point, e, vp.patch, options.quadrature, pts);
        for (const auto& q : pts) {
            const auto g = kernel_geometry<double>(source.point, source.normal, q.x, e.normal());
            if (g.distance < r_min)
                throw CoincidentPoints("quadrature point coincides with the source");
            const double f = alpha ? shape_value(e.shape(), *alpha, q.ref) : 1.0;
            sum += kernel_value(kind, g, props) * f * q.weight;
        }
    }
    return sum;
}

SurfaceSystem assemble_surface(const SurfaceMesh& mesh, const VoxelGrid& grid, const RadiativeProperties& props,
                               const CollocationSet& colloc, const AssemblyOptions& opts,
                               std::vector<VisibilityRecord>* records) {
    const AssemblyOptions options = scaled(opts, props);
    options.visibility.budget.validate();
    options.quadrature.validate();
    const int nb = colloc.boundary_count();
    const int ni = colloc.interior_count();
    SurfaceSystem sys{Eigen::MatrixXd::Zero(nb, nb), Eigen::MatrixXd::Zero(nb, ni), Eigen::VectorXd::Zero(nb)};

    const double beta = props.extinction();
    const double sigma = props.stefan_boltzmann;
    const double inv_pi = 1.0 / std::numbers::pi;
    const double scat = props.sigma_s * 0.25 * inv_pi;
    const std::vector<double> ib = blackbody_intensity(grid, sigma);
    const bool medium_source = props.sigma_a > 0.0 && any_nonzero(ib);
    const bool need_path = ni > 0 && (props.sigma_s > 0.0 || medium_source);
    const double r_min = kCoincidentTol * props.domain_diameter;

    std::vector<std::vector<VisibilityRecord>> per_row(records ? static_cast<std::size_t>(nb) : 0);
    parallel_rows(nb, options.threads, [&](int i) {
        const BoundaryPoint& c = colloc.boundary[static_cast<std::size_t>(i)];
        const Source src{c.point, c.normal};
        const auto ei = static_cast<std::size_t>(c.element);
        const double eps_p = mesh.element(ei).emissivity();
        std::vector<Sample> samples;
        std::vector<CellWeight> path;
        visible_samples(src, mesh, options, i, samples, records ? &per_row[static_cast<std::size_t>(i)] : nullptr);

        double h = 0.0;
        for (const auto& s : samples) {
            const auto ek = static_cast<std::size_t>(s.element);
            const auto& e = mesh.element(ek);
            const auto g = kernel_geometry<double>(src.point, src.normal, s.q.x, e.normal());
            if (g.distance < r_min)
                throw CoincidentPoints("quadrature point coincides with a collocation point");
            const double geo = g.cos_p * g.cos_r / (g.distance * g.distance);
            const double p1w = std::exp(-beta * g.distance) * geo * inv_pi * s.q.weight;
            const double eps_k = e.emissivity();
            const double refl = (1.0 - eps_k) / eps_k;
            const int off = colloc.element_offset[ek];
            for (int a = 0; a < shape_count(e.shape()); ++a)
                sys.G(i, off + a) += eps_p * refl * shape_value(e.shape(), a, s.q.ref) * p1w;
            h += eps_p * blackbody(mesh.temperature(ek), sigma).emissive_power * p1w;
            if (!need_path)
                continue;
            path_weights({src.point, s.q.x}, grid, beta, path);
            for (const auto& cw : path) {
                const int m = colloc.cell_to_medium[static_cast<std::size_t>(cw.cell)];
                if (m < 0)
                    continue;
                const double gw = geo * s.q.weight * cw.weight;
                sys.F(i, m) += eps_p * scat * gw;
                if (medium_source)
                    h += eps_p * props.sigma_a * gw * ib[static_cast<std::size_t>(cw.cell)];
            }
        }
        h -= eps_p * blackbody(mesh.temperature(ei), sigma).emissive_power;
        sys.h(i) = h;
        check_row(sys.G, sys.F, h, i, "surface");
    });
    flatten(per_row, 0, records);
    return sys;
}

VolumeSystem assemble_volume(const SurfaceMesh& mesh, const VoxelGrid& grid, const RadiativeProperties& props,
                             const CollocationSet& colloc, const AssemblyOptions& opts,
                             std::vector<VisibilityRecord>* records) {
    return assemble_volume_rows(mesh, grid, props, colloc, colloc.interior, opts, records);
}

VolumeSystem assemble_volume_rows(const SurfaceMesh& mesh, const VoxelGrid& grid, const RadiativeProperties& props,
                                  const CollocationSet& colloc, const std::vector<Point3>& points,
                                  const AssemblyOptions& opts, std::vector<VisibilityRecord>* records) {
    const AssemblyOptions options = scaled(opts, props);
    options.visibility.budget.validate();
    options.quadrature.validate();
    const int nb = colloc.boundary_count();
    const int ni = colloc.interior_count();
    const int rows = static_cast<int>(points.size());
    VolumeSystem sys{Eigen::MatrixXd::Zero(rows, ni), Eigen::MatrixXd::Zero(rows, nb), Eigen::VectorXd::Zero(rows)};

    const double beta = props.extinction();
    const double sigma = props.stefan_boltzmann;
    const double inv_pi = 1.0 / std::numbers::pi;
    const double scat = props.sigma_s * 0.25 * inv_pi;
    const std::vector<double> ib = blackbody_intensity(grid, sigma);
    const bool medium_source = props.sigma_a > 0.0 && any_nonzero(ib);
    const bool need_path = props.sigma_s > 0.0 || medium_source;
    const double r_min = kCoincidentTol * props.domain_diameter;

    std::vector<std::vector<VisibilityRecord>> per_row(records ? static_cast<std::size_t>(rows) : 0);
    parallel_rows(rows, options.threads, [&](int j) {
        const Source src{points[static_cast<std::size_t>(j)], std::nullopt};
        std::vector<Sample> samples;
        std::vector<CellWeight> path;
        visible_samples(src, mesh, options, j, samples, records ? &per_row[static_cast<std::size_t>(j)] : nullptr);

        double t = 0.0;
        for (const auto& s : samples) {
            const auto ek = static_cast<std::size_t>(s.element);
            const auto& e = mesh.element(ek);
            const auto g = kernel_geometry<double>(src.point, std::nullopt, s.q.x, e.normal());
            if (g.distance < r_min)
                throw CoincidentPoints("quadrature point coincides with a medium point");
            const double geo = g.cos_r / (g.distance * g.distance);
            const double p4w = std::exp(-beta * g.distance) * geo * inv_pi * s.q.weight;
            const double eps_k = e.emissivity();
            const double refl = (1.0 - eps_k) / eps_k;
            const int off = colloc.element_offset[ek];
            for (int a = 0; a < shape_count(e.shape()); ++a)
                sys.V(j, off + a) += refl * shape_value(e.shape(), a, s.q.ref) * p4w;
            t += blackbody(mesh.temperature(ek), sigma).emissive_power * p4w;
            if (!need_path)
                continue;
            path_weights({src.point, s.q.x}, grid, beta, path);
            for (const auto& cw : path) {
                const int m = colloc.cell_to_medium[static_cast<std::size_t>(cw.cell)];
                if (m < 0)
                    continue;
                const double gw = geo * s.q.weight * cw.weight;
                sys.U(j, m) += scat * gw;
                if (medium_source)
                    t += props.sigma_a * gw * ib[static_cast<std::size_t>(cw.cell)];
            }
        }
        sys.t(j) = t;
        check_row(sys.U, sys.V, t, j, "volume");
    });
    flatten(per_row, nb, records);
    return sys;
}

RowSumReport operator_row_sums(const SurfaceSystem& surface, const VolumeSystem& volume,
                               const RadiativeProperties& props, double eps_min, double eps_max, double tolerance) {
    auto max_row = [](const Eigen::MatrixXd& m) {
        return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
    };
    const double beta = props.extinction();
    const double ratio = beta > 0.0 ? props.sigma_s / beta : 0.0;
    RowSumReport rep;
    rep.tolerance = tolerance;
    rep.row_sum = {max_row(surface.G), max_row(surface.F), max_row(volume.U), max_row(volume.V)};
    rep.bound = {eps_max * (1.0 - eps_min) / eps_min, eps_max * ratio / 4.0,
                 ratio * (1.0 - std::exp(-beta * props.domain_diameter)), 4.0 * (1.0 - eps_min) / eps_min};
    for (std::size_t k = 0; k < 4; ++k)
        rep.within[k] = rep.row_sum[k] <= rep.bound[k] * (1.0 + tolerance) + 1e-12;
    return rep;
}

namespace {
constexpr char kBlockMagic[8] = {'R', 'I', 'T', 'E', 'B', 'L', 'K', '1'};
}

void write_block(const std::string& path, const Eigen::MatrixXd& block) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path);
    const std::uint64_t rows = static_cast<std::uint64_t>(block.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(block.cols());
    out.write(kBlockMagic, sizeof kBlockMagic);
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = block;
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

Eigen::MatrixXd read_block(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[8];
    std::uint64_t rows = 0, cols = 0;
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kBlockMagic, sizeof magic) != 0)
        throw Error("not a matrix block: " + path);
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(static_cast<Eigen::Index>(rows),
                                                                               static_cast<Eigen::Index>(cols));
    if (!in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double))))
        throw Error("truncated matrix block: " + path);
    return rm;
}

} // namespace rite
