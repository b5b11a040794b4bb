#pragma once

#include <filesystem>

#include <json.hpp>

#include "rite/geometry.hpp"

namespace rite {

/// Surface mesh plus the voxel grid covering the medium.
struct Enclosure {
    SurfaceMesh mesh;
    VoxelGrid grid;
};

/// Parses the mesh file layout:
///   {"nodes": [[x,y,z], ...],
///    "elements": [{"nodes": [i,j,k(,l)], "epsilon": e, "T": t}, ...],
///    "grid": {"origin": [..], "spacing": [..], "dims": [nx,ny,nz], "T": [...]}}
/// Grid temperatures are x-fastest; a scalar "T" fills every cell.
/// The mesh must be closed and lie inside the grid box.
Enclosure parse_enclosure(const nlohmann::json& doc);
Enclosure load_enclosure(const std::filesystem::path& path);

nlohmann::json enclosure_to_json(const Enclosure& enclosure);
void save_enclosure(const std::filesystem::path& path, const Enclosure& enclosure);

VoxelGrid parse_grid(const nlohmann::json& doc);

} // namespace rite
