// Cell-local discrete Hodge operators (the closure-relation discretization),
// their design-condition checks, global assembly and subcell field
// reconstruction.
//
// Vertex kind: edge circulations -> dual-face fluxes, weighted by the
// conductivity. Cell kind: face fluxes -> dual-edge circulations, weighted
// by its inverse.

#ifndef CDO_HODGE_HPP
#define CDO_HODGE_HPP

#include <vector>

#include "cdo/dual.hpp"
#include "cdo/linalg.hpp"
#include "cdo/mesh.hpp"

namespace cdo {

struct Material {
  std::function<Mat3(const Vec3&)> tensor;
  double eig_min_bound = 1e-12;
  double eig_max_bound = 1e12;

  /// Samples at the cell barycenter and validates symmetry and the
  /// eigenvalue bounds.
  Mat3 sample(const Vec3& x) const;

  static Material isotropic(double value);
  static Material diagonal(double d0, double d1, double d2);
  static Material constant(const Mat3& tensor);
};

enum class HodgeKind { vertex, cell };
enum class HodgeMethod { reconstruction, stabilized_algebraic, diagonal_orthogonal };

struct LocalHodge {
  int cell = -1;
  HodgeKind kind = HodgeKind::vertex;
  std::vector<int> entities;  // global edge or face ids
  DenseSym matrix;
};

struct GlobalHodge {
  HodgeKind kind = HodgeKind::vertex;
  SparseSym matrix;  // over global edges (vertex kind) or faces (cell kind)
};

struct HodgeCheck {
  double p0_residual = 0.0;     // normalized by |c|^(2/3) |T G|
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double stability_ratio_min = 0.0;  // lambda_min * n / trace
  double stability_ratio_max = 0.0;
};

/// Piecewise-constant reconstruction per (cell, local entity) subvolume.
struct SubcellField {
  HodgeKind kind = HodgeKind::vertex;
  std::vector<std::vector<Vec3>> cell_values;  // aligned with CellDual edges/faces
};

LocalHodge build_local_hodge(int cell, HodgeMethod method, HodgeKind kind,
                             const Material& material, double beta, const PrimalMesh& mesh,
                             const GeometricTables& geom, const DualGeometry& dual);

HodgeCheck check_local_hodge(const LocalHodge& h, const PrimalMesh& mesh,
                             const GeometricTables& geom, const DualGeometry& dual,
                             const Material& material);

GlobalHodge assemble_global(const PrimalMesh& mesh, const GeometricTables& geom,
                            const DualGeometry& dual, const Material& material,
                            HodgeMethod method, HodgeKind kind, double beta);

SubcellField reconstruct_field(const DoFArray& dofs, const PrimalMesh& mesh,
                               const GeometricTables& geom, const DualGeometry& dual,
                               HodgeKind kind, double beta);

}  // namespace cdo

#endif
