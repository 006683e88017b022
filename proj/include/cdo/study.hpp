// Convergence-study harness: run configurations, rate fitting, the discrete
// Poincare / Sobolev diagnostics, and CSV/SVG report emission.

#ifndef CDO_STUDY_HPP
#define CDO_STUDY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cdo/schemes.hpp"

namespace cdo {

struct MeshSpec {
  std::string family = "cart";  // cart | pert | prism
  int n = 4;                    // cells per direction (layers/rings for prism)
  double amplitude = 0.2;       // pert only
  std::uint64_t seed = 42;      // pert only
};

struct RunConfig {
  SchemeKind scheme = SchemeKind::vertex;
  MeshSpec mesh;
  std::string case_name = "sin-iso";
  HodgeMethod method = HodgeMethod::reconstruction;
  double beta = 1.0;
  double tol = 1e-10;
  int max_iter = 100000;
  std::string output_dir = ".";
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);

PrimalMesh build_family_mesh(const MeshSpec& spec);

ErrorReport run_case(const RunConfig& config);

struct ConvergenceTable {
  std::vector<ErrorReport> rows;  // h strictly decreasing
  // fitted least-squares slopes of log(err) vs log(h); NaN when any value in
  // the column sits below the 1e-12 floor
  double rate_energy = 0.0;
  double rate_energy_rec = 0.0;
  double rate_l2_pot = 0.0;
  double rate_flux = 0.0;
};

/// Least-squares slope of log(err) against log(h). Returns NaN if fewer than
/// 3 rows or any error is at or below the 1e-12 rounding floor.
double fit_rate(const std::vector<double>& h, const std::vector<double>& err);

/// Runs one case per level (level values replace mesh.n); the perturbation
/// seed advances as base seed + level index.
ConvergenceTable run_convergence(const RunConfig& config, const std::vector<int>& levels);

/// Smallest eigenvalue of the interior pencil A p = lambda M p (A the
/// Lambda = Id vertex stiffness, M the dual-volume mass) by inverse power
/// iteration; returns C_P = 1/sqrt(lambda_min).
double poincare_constant(const PrimalMesh& mesh, const GeometricTables& geom,
                         const DualGeometry& dual, double eig_tol = 1e-8);

struct SobolevRatio {
  int q = 2;
  double max_ratio = 0.0;  // worst draw of ||p||_{lq,dual} / |p|_A
};

std::vector<SobolevRatio> sobolev_ratio_diagnostic(const PrimalMesh& mesh,
                                                   const GeometricTables& geom,
                                                   const DualGeometry& dual,
                                                   const std::vector<int>& q_list,
                                                   int n_draws = 10, std::uint64_t seed = 7);

// --- reports -----------------------------------------------------------------

std::string csv_string(const ConvergenceTable& table);
ConvergenceTable parse_csv(const std::string& text);  // rates are refit
std::string svg_string(const ConvergenceTable& table);

/// Atomic writes (temp file + rename). Throw IoError on unwritable paths and
/// InvalidArgumentError on empty tables.
void write_csv(const ConvergenceTable& table, const std::string& path);
void write_svg(const ConvergenceTable& table, const std::string& path);

}  // namespace cdo

#endif
