#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rite/assembly.hpp"
#include "rite/mesh_io.hpp"
#include "rite/solver.hpp"
#include "rite/validation.hpp"

namespace rite {

enum class ProfileQuantity { Q, G };

struct ProfileSpec {
    std::string name;
    ProfileQuantity quantity = ProfileQuantity::Q;
    Point3 start = Point3::Zero();
    Point3 end = Point3::Zero();
    int samples = 2;
};

struct CaseConfig {
    std::filesystem::path mesh;                 ///< resolved against the config file's directory
    std::optional<nlohmann::json> grid;         ///< replaces the mesh file's grid when present
    RadiativeProperties properties;             ///< domain_diameter is filled from the mesh
    SolverConfig solver;
    VisibilityOptions visibility;
    QuadratureOptions quadrature;
    std::filesystem::path output_dir = "out";
    double reference_temperature = 0.0;         ///< K; > 0 adds dimensionless profile columns
    std::vector<ProfileSpec> profiles;
    int threads = 0;                            ///< 0: hardware concurrency
    std::uint64_t seed = kDefaultSeed;
    double energy_tolerance = 0.03;
    double row_sum_tolerance = 0.02;
};

/// Missing keys take the defaults above. Relative paths are resolved against base_dir.
CaseConfig parse_case_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
CaseConfig load_case_config(const std::filesystem::path& path);
/// Every field with defaults resolved and paths made absolute.
nlohmann::json case_config_to_json(const CaseConfig& config);

struct RunOptions {
    bool dump_matrices = false;
    bool dump_visibility = false;
};

struct CaseResult {
    Enclosure enclosure;
    CollocationSet colloc;
    SolutionState solution;
    std::vector<OracleReport> reports;
    bool mandatory_pass = false;
    int exit_code = 1;
};

/// Assembles, checks solvability, solves, validates and writes outputs.
/// Exit code 0 iff the solver converged and the energy balance and row-sum
/// checks pass.
CaseResult run_case(const CaseConfig& config, const RunOptions& options = {});

/// Nearest-entity sampling: the cell containing each sample for G, the
/// nearest collocation point on the containing elements for q. Throws
/// LineOutsideDomain when a sample is outside the medium or off the surface.
struct ProfileSample {
    double s;
    Point3 x;
    double value;
};
std::vector<ProfileSample> sample_profile(const SolutionState& solution, const Enclosure& enclosure,
                                          const CollocationSet& colloc, const ProfileSpec& spec);
void emit_profile(std::ostream& out, const std::vector<ProfileSample>& samples, ProfileQuantity quantity,
                  double reference_temperature, double stefan_boltzmann = kStefanBoltzmann);

} // namespace rite
