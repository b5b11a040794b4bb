#include "rite/cases.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace rite {

namespace {

using Key = std::array<int, 3>;

/// Boundary faces of a union of unit lattice cubes, scaled by h. Each face
/// is oriented with its normal pointing into the solid.
template <typename Solid>
Enclosure voxel_enclosure(std::array<int, 3> dims, double h, Solid&& solid, const CaseParams& params) {
    std::map<Key, int> node_index;
    std::vector<Point3> nodes;
    std::vector<std::vector<int>> conn;
    std::vector<double> eps, temp;
    auto node = [&](Key k) {
        auto [it, inserted] = node_index.try_emplace(k, static_cast<int>(nodes.size()));
        if (inserted)
            nodes.emplace_back(k[0] * h, k[1] * h, k[2] * h);
        return it->second;
    };
    auto inside = [&](int i, int j, int k) {
        return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2] && solid(i, j, k);
    };
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        for (int k = 0; k < dims[2]; ++k)
            for (int j = 0; j < dims[1]; ++j)
                for (int i = 0; i < dims[0]; ++i) {
                    if (!inside(i, j, k))
                        continue;
                    const Key cell{i, j, k};
                    for (int side : {-1, 1}) {
                        Key nb = cell;
                        nb[static_cast<std::size_t>(a)] += side;
                        if (inside(nb[0], nb[1], nb[2]))
                            continue;
                        Key v0 = cell;
                        if (side > 0)
                            v0[static_cast<std::size_t>(a)] += 1;
                        Key vb = v0, vc = v0, vbc = v0;
                        vb[static_cast<std::size_t>(b)] += 1;
                        vc[static_cast<std::size_t>(c)] += 1;
                        vbc[static_cast<std::size_t>(b)] += 1;
                        vbc[static_cast<std::size_t>(c)] += 1;
                        // v0, vb, vbc, vc has normal +e_a; the inward normal is -side e_a
                        if (side < 0)
                            conn.push_back({node(v0), node(vb), node(vbc), node(vc)});
                        else
                            conn.push_back({node(v0), node(vc), node(vbc), node(vb)});
                        eps.push_back(params.emissivity);
                        const bool bottom = a == 2 && side < 0 && k == 0;
                        temp.push_back(bottom && params.bottom_temperature ? *params.bottom_temperature
                                                                            : params.wall_temperature);
                    }
                }
    }
    Enclosure out{SurfaceMesh(std::move(nodes), std::move(conn), std::move(eps), std::move(temp)),
                  VoxelGrid(Point3::Zero(), Vector3::Constant(h), dims)};
    out.mesh.check_closed();
    auto& t = out.grid.temperature();
    t.assign(static_cast<std::size_t>(out.grid.cell_count()), 0.0);
    for (int cidx = 0; cidx < out.grid.cell_count(); ++cidx) {
        const auto ijk = out.grid.ijk(cidx);
        if (solid(ijk[0], ijk[1], ijk[2]))
            t[static_cast<std::size_t>(cidx)] = params.medium_temperature;
    }
    return out;
}

} // namespace

BuiltinCase parse_builtin_case(const std::string& name) {
    std::string up = name;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char ch) { return std::toupper(ch); });
    if (up == "CUBE")
        return BuiltinCase::Cube;
    if (up == "LSHAPE")
        return BuiltinCase::LShape;
    throw ConfigError("unknown builtin case '" + name + "' (expected CUBE or LSHAPE)");
}

std::string to_string(BuiltinCase kind) { return kind == BuiltinCase::Cube ? "CUBE" : "LSHAPE"; }

CaseParams default_params(BuiltinCase kind) {
    CaseParams p;
    if (kind == BuiltinCase::Cube) {
        p.bottom_temperature = 1000.0;
    } else {
        p.wall_temperature = 500.0;
        p.medium_temperature = 1000.0;
    }
    return p;
}

Enclosure generate_case(BuiltinCase kind, int resolution, const CaseParams& params) {
    if (resolution < 1)
        throw ConfigError("resolution must be at least 1");
    const int n = resolution;
    const double h = 1.0 / n;
    if (kind == BuiltinCase::Cube)
        return voxel_enclosure({n, n, n}, h, [](int, int, int) { return true; }, params);
    return voxel_enclosure({n, 3 * n, 3 * n}, h, [n](int, int j, int k) { return j < n || k < n; }, params);
}

} // namespace rite
