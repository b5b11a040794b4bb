#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "rite/geometry.hpp"

namespace rite {

inline constexpr double kStefanBoltzmann = 5.670374419e-8;

struct RadiativeProperties {
    double sigma_a = 0.0;            ///< absorption coefficient, 1/m
    double sigma_s = 0.0;            ///< scattering coefficient, 1/m
    double stefan_boltzmann = kStefanBoltzmann;
    double domain_diameter = 1.0;    ///< R, m

    double extinction() const { return sigma_a + sigma_s; }
    double albedo() const { return extinction() > 0.0 ? sigma_s / extinction() : 0.0; }
    /// Full solves need beta > 0; kernels alone accept the transparent limit.
    void validate(bool allow_transparent = false) const;
};

enum class KernelKind { P1, P2, P3, P4, P5, P6 };

inline bool needs_source_normal(KernelKind kind) {
    return kind == KernelKind::P1 || kind == KernelKind::P2 || kind == KernelKind::P3;
}

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
Scalar transmittance(const Vec3<Scalar>& p, const Vec3<Scalar>& r, Scalar beta) {
    using std::exp;
    return exp(-beta * (p - r).norm());
}

template <typename Scalar>
struct Emission {
    Scalar emissive_power; ///< E_b, W/m^2
    Scalar intensity;      ///< I_b = E_b / pi
};

template <typename Scalar>
Emission<Scalar> blackbody(Scalar temperature, Scalar sigma = Scalar(kStefanBoltzmann)) {
    const Scalar t2 = temperature * temperature;
    const Scalar eb = sigma * t2 * t2;
    return {eb, eb / Scalar(std::numbers::pi)};
}

/// Distance and clamped direction cosines between a source p and a surface
/// point r. cos_p is 1 when the source carries no normal.
template <typename Scalar>
struct KernelGeometry {
    Scalar distance;
    Scalar cos_p;
    Scalar cos_r;
};

template <typename Scalar>
KernelGeometry<Scalar> kernel_geometry(const Vec3<Scalar>& p, const std::optional<Vec3<Scalar>>& n_p,
                                       const Vec3<Scalar>& r, const Vec3<Scalar>& n_r) {
    const Vec3<Scalar> d = r - p;
    const Scalar dist = d.norm();
    const Scalar cp = n_p ? std::clamp<Scalar>(n_p->dot(d) / dist, Scalar(0), Scalar(1)) : Scalar(1);
    const Scalar cr = std::clamp<Scalar>(-n_r.dot(d) / dist, Scalar(0), Scalar(1));
    return {dist, cp, cr};
}

/// Kernel functions without the shadow indicator; visibility is applied by
/// the integrator.
template <typename Scalar>
Scalar kernel_value(KernelKind kind, const KernelGeometry<Scalar>& g, const RadiativeProperties& props) {
    using std::exp;
    const Scalar inv_pi = Scalar(1.0 / std::numbers::pi);
    const Scalar inv_4pi = Scalar(0.25 / std::numbers::pi);
    const Scalar r2 = g.distance * g.distance;
    const Scalar beta = Scalar(props.extinction());
    switch (kind) {
    case KernelKind::P1:
        return exp(-beta * g.distance) * g.cos_p * g.cos_r * inv_pi / r2;
    case KernelKind::P2:
        return Scalar(props.sigma_a) * g.cos_p * g.cos_r / r2;
    case KernelKind::P3:
        return Scalar(props.sigma_s) * inv_4pi * g.cos_p * g.cos_r / r2;
    case KernelKind::P4:
        return exp(-beta * g.distance) * g.cos_r * inv_pi / r2;
    case KernelKind::P5:
        return Scalar(props.sigma_a) * g.cos_r / r2;
    case KernelKind::P6:
        return Scalar(props.sigma_s) * inv_4pi * g.cos_r / r2;
    }
    return Scalar(0);
}

/// Throws CoincidentPoints when |p - r| < 1e-12 R, and Error when a P1-P3
/// kernel is requested without a source normal.
double kernel_value(KernelKind kind, const Point3& p, const std::optional<Vector3>& n_p, const Point3& r,
                    const Vector3& n_r, const RadiativeProperties& props);

/// Integral of exp(-beta s) over [s_enter, s_exit].
double span_attenuation(double s_enter, double s_exit, double beta);

struct CellWeight {
    int cell;
    double weight; ///< integral of exp(-beta s) over the cell's span
};

/// Per-cell attenuation weights along seg, arclength measured from seg.start.
void path_weights(const Segment& seg, const VoxelGrid& grid, double beta, std::vector<CellWeight>& out);

/// Sum over the traversed cells of field[cell] * integral of exp(-beta s) ds.
double path_source_integral(const Point3& p, const Point3& r, const VoxelGrid& grid,
                            std::span<const double> field, double beta);

} // namespace rite
