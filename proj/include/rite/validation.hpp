#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rite/assembly.hpp"
#include "rite/solver.hpp"

namespace rite {

struct OracleReport {
    std::string check;
    double computed = 0.0;
    double reference = 0.0;
    double abs_deviation = 0.0;
    double rel_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool mandatory = false; ///< counts toward a run's exit code
    std::string resolution;
};

/// Pass iff the relative deviation from reference is within tolerance.
OracleReport compare_to(std::string check, double computed, double reference, double tolerance,
                        std::string resolution = {});

/// Integral of cos_p cos_r / |p - r|^2 over the visible surface from a
/// boundary point; pi for a closed surface.
double lemma1_integral(const SurfaceMesh& mesh, const Source& p, const AssemblyOptions& options = {});
OracleReport lemma1_identity(const SurfaceMesh& mesh, const Source& p, double tolerance = 0.01,
                             const AssemblyOptions& options = {});

/// Integral of exp(-beta |p - r|) cos_r / |p - r|^2 over the visible surface
/// from an interior point; 4 pi at beta = 0.
double lemma3_integral(const SurfaceMesh& mesh, const Point3& p, double beta = 0.0,
                       const AssemblyOptions& options = {});
/// beta = 0 compares with 4 pi; beta > 0 only checks the upper bound.
OracleReport lemma3_interior_identity(const SurfaceMesh& mesh, const Point3& p, double beta = 0.0,
                                      double tolerance = 0.01, const AssemblyOptions& options = {});

inline constexpr std::uint64_t kDefaultSeed = 20240917;

/// Area-weighted fraction of stratified, jittered sample points r on the
/// element with chi_point(p, r) = 1.
double visibility_oracle(const Point3& p, int element, const SurfaceMesh& mesh, int n_rays = 10000,
                         std::uint64_t seed = kDefaultSeed);

struct EnergyTerms {
    double surface;  ///< integral of q over S
    double medium;   ///< integral of sigma_a (4 sigma T^4 - G) over V
    double wall_emission;
};

/// The medium term uses G at 2x2x2 Gauss points per cell, evaluated from the
/// volume representation with the solved q and cell G.
EnergyTerms energy_terms(const SolutionState& solution, const SurfaceMesh& mesh, const VoxelGrid& grid,
                         const CollocationSet& colloc, const RadiativeProperties& props,
                         const AssemblyOptions& options = {});

/// |surface - medium| over the larger term, or over the total wall emission
/// when both terms are below tolerance times that emission.
OracleReport energy_balance(const SolutionState& solution, const SurfaceMesh& mesh, const VoxelGrid& grid,
                            const CollocationSet& colloc, const RadiativeProperties& props,
                            double tolerance = 0.03, const AssemblyOptions& options = {});

/// One report per operator block, from operator_row_sums.
std::vector<OracleReport> row_sum_reports(const RowSumReport& rows);

void write_reports_csv(std::ostream& out, const std::vector<OracleReport>& reports);
void write_reports_table(std::ostream& out, const std::vector<OracleReport>& reports);

} // namespace rite
