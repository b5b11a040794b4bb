#include "rite/kernels.hpp"

namespace rite {

void RadiativeProperties::validate(bool allow_transparent) const {
    if (!(sigma_a >= 0.0) || !(sigma_s >= 0.0))
        throw ConfigError("absorption and scattering coefficients must be non-negative");
    if (!allow_transparent && !(extinction() > 0.0))
        throw ConfigError("extinction coefficient must be positive");
    if (!(domain_diameter > 0.0))
        throw ConfigError("domain diameter must be positive");
    if (!(stefan_boltzmann > 0.0))
        throw ConfigError("Stefan-Boltzmann constant must be positive");
}

double kernel_value(KernelKind kind, const Point3& p, const std::optional<Vector3>& n_p, const Point3& r,
                    const Vector3& n_r, const RadiativeProperties& props) {
    if ((p - r).norm() < 1e-12 * props.domain_diameter)
        throw CoincidentPoints("kernel evaluated at coincident points");
    if (needs_source_normal(kind) && !n_p)
        throw Error("kernels P1-P3 need a source normal");
    return kernel_value(kind, kernel_geometry<double>(p, n_p, r, n_r), props);
}

double span_attenuation(double s_enter, double s_exit, double beta) {
    const double len = s_exit - s_enter;
    if (beta == 0.0)
        return len;
    return std::exp(-beta * s_enter) * -std::expm1(-beta * len) / beta;
}

void path_weights(const Segment& seg, const VoxelGrid& grid, double beta, std::vector<CellWeight>& out) {
    out.clear();
    for (const auto& span : traverse_voxels(seg, grid))
        out.push_back({span.cell, span_attenuation(span.s_enter, span.s_exit, beta)});
}

double path_source_integral(const Point3& p, const Point3& r, const VoxelGrid& grid,
                            std::span<const double> field, double beta) {
    if (field.size() != static_cast<std::size_t>(grid.cell_count()))
        throw Error("field size does not match the grid");
    double total = 0.0;
    for (const auto& span : traverse_voxels({p, r}, grid))
        total += field[static_cast<std::size_t>(span.cell)] * span_attenuation(span.s_enter, span.s_exit, beta);
    return total;
}

} // namespace rite
