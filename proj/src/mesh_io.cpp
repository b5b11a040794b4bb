#include "rite/mesh_io.hpp"

#include <fstream>
#include <sstream>

namespace rite {

namespace {

Point3 to_point(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3)
        throw InvalidMesh("expected a 3-component array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json from_point(const Point3& p) { return nlohmann::json::array({p.x(), p.y(), p.z()}); }

} // namespace

VoxelGrid parse_grid(const nlohmann::json& g) {
    const Point3 origin = to_point(g.at("origin"));
    const Vector3 spacing = to_point(g.at("spacing"));
    const auto& dims_json = g.at("dims");
    if (!dims_json.is_array() || dims_json.size() != 3)
        throw InvalidMesh("grid dims must have three entries");
    const std::array<int, 3> dims{dims_json[0].get<int>(), dims_json[1].get<int>(), dims_json[2].get<int>()};
    VoxelGrid grid(origin, spacing, dims);
    if (g.contains("T")) {
        const auto& t = g.at("T");
        if (t.is_number()) {
            grid.temperature().assign(static_cast<std::size_t>(grid.cell_count()), t.get<double>());
        } else {
            if (t.size() != static_cast<std::size_t>(grid.cell_count()))
                throw InvalidMesh("grid T array must have nx*ny*nz entries");
            for (std::size_t c = 0; c < t.size(); ++c)
                grid.temperature()[c] = t[c].get<double>();
        }
    }
    for (double t : grid.temperature())
        if (!(t >= 0.0))
            throw InvalidMesh("grid temperatures must be non-negative");
    return grid;
}

Enclosure parse_enclosure(const nlohmann::json& doc) {
    try {
        std::vector<Point3> nodes;
        for (const auto& n : doc.at("nodes"))
            nodes.push_back(to_point(n));
        std::vector<std::vector<int>> conn;
        std::vector<double> eps;
        std::vector<double> temp;
        for (const auto& e : doc.at("elements")) {
            conn.push_back(e.at("nodes").get<std::vector<int>>());
            eps.push_back(e.value("epsilon", 1.0));
            temp.push_back(e.value("T", 0.0));
        }
        Enclosure enc{SurfaceMesh(std::move(nodes), std::move(conn), std::move(eps), std::move(temp)),
                      parse_grid(doc.at("grid"))};
        enc.mesh.check_closed();

        const Point3 lo = enc.grid.box_min();
        const Point3 hi = enc.grid.box_max();
        const double tol = 1e-9 * enc.grid.spacing().minCoeff();
        for (const auto& p : enc.mesh.nodes())
            if ((p.array() < lo.array() - tol).any() || (p.array() > hi.array() + tol).any())
                throw InvalidMesh("grid box does not contain the mesh");
        return enc;
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidMesh(std::string("malformed mesh file: ") + ex.what());
    }
}

Enclosure load_enclosure(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidMesh("cannot open mesh file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidMesh("cannot parse " + path.string() + ": " + ex.what());
    }
    return parse_enclosure(doc);
}

nlohmann::json enclosure_to_json(const Enclosure& enc) {
    nlohmann::json doc;
    auto& nodes = doc["nodes"] = nlohmann::json::array();
    for (const auto& p : enc.mesh.nodes())
        nodes.push_back(from_point(p));
    auto& elems = doc["elements"] = nlohmann::json::array();
    for (std::size_t k = 0; k < enc.mesh.size(); ++k)
        elems.push_back({{"nodes", enc.mesh.connectivity()[k]},
                         {"epsilon", enc.mesh.element(k).emissivity()},
                         {"T", enc.mesh.temperature(k)}});
    const auto& g = enc.grid;
    doc["grid"] = {{"origin", from_point(g.origin())},
                   {"spacing", from_point(g.spacing())},
                   {"dims", {g.dims()[0], g.dims()[1], g.dims()[2]}},
                   {"T", g.temperature()}};
    return doc;
}

void save_enclosure(const std::filesystem::path& path, const Enclosure& enc) {
    std::ofstream out(path);
    if (!out)
        throw InvalidMesh("cannot write mesh file " + path.string());
    out << enclosure_to_json(enc).dump(1) << '\n';
}

} // namespace rite
