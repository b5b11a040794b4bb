#pragma once

#include <optional>
#include <string>

#include "rite/mesh_io.hpp"

namespace rite {

enum class BuiltinCase { Cube, LShape };

BuiltinCase parse_builtin_case(const std::string& name);
std::string to_string(BuiltinCase kind);

/// Temperatures and wall emissivity of a generated case.
struct CaseParams {
    double emissivity = 1.0;
    double wall_temperature = 0.0;   ///< K
    double medium_temperature = 0.0; ///< K
    /// Overrides the temperature of the z = 0 wall.
    std::optional<double> bottom_temperature;
};

/// CUBE: unit cube, hot bottom wall at 1000 K, other walls and medium cold.
/// LSHAPE: black walls at 500 K, medium at 1000 K.
CaseParams default_params(BuiltinCase kind);

/// Watertight quad mesh with inward normals and the matching voxel grid.
///   CUBE    [0,1]^3, n x n quads per face, n^3 cells.
///   LSHAPE  W x L x H = 1 x 3 x 3: the box [0,1]x[0,3]x[0,3] without the
///           notch y > 1, z > 1 (notch height 2, leg width 1); n elements per
///           metre, grid n x 3n x 3n with the notch cells outside the medium.
Enclosure generate_case(BuiltinCase kind, int resolution, const CaseParams& params);
inline Enclosure generate_case(BuiltinCase kind, int resolution) {
    return generate_case(kind, resolution, default_params(kind));
}

} // namespace rite
