// Barycentric dual-mesh geometry: per-cell dual-face area vectors attached
// to primal edges, dual-edge vectors attached to primal faces, and the
// subvolume partitions on which the Hodge consistency identities rest.
//
// Dual entities are never materialized as global polytopes; only the
// per-cell quantities consumed by the Hodge builders are stored.

#ifndef CDO_DUAL_HPP
#define CDO_DUAL_HPP

#include <vector>

#include "cdo/core.hpp"
#include "cdo/mesh.hpp"

namespace cdo {

/// Barycentric tetrahedron (x_v, x_e, x_f, x_c); indices are local
/// positions in the owning CellDual lists.
struct SubSimplex {
  Vec3 barycenter;
  double volume = 0.0;
  int local_vertex = -1;
  int local_edge = -1;
  int local_face = -1;
};

struct CellDual {
  std::vector<int> vertices;            // sorted global ids
  std::vector<int> edges;               // sorted global ids
  std::vector<int> faces;               // aligned with mesh.cells[c]

  std::vector<Vec3> edge_dual_area;     // s~_{e,c}, oriented with the edge
  std::vector<double> edge_subvol;      // |p_{e,c}| = (1/3) e . s~
  std::vector<Vec3> edge_subvol_center; // quadrature point of p_{e,c}

  std::vector<Vec3> face_dual_edge;     // e~_{f,c}, outward aligned
  std::vector<double> face_subvol;      // |p_{f,c}| = (1/3) f_out . e~
  std::vector<Vec3> face_subvol_center;

  std::vector<double> vertex_subvol;    // |p_{v,c}|

  std::vector<SubSimplex> subsimplices;

  int local_edge_index(int global_edge) const;
  int local_face_index(int global_face) const;
};

struct DualGeometry {
  std::vector<CellDual> cells;
  std::vector<double> dual_cell_volume;  // |c~_v| per vertex
};

/// Per-cell P0-consistency diagnostics, Frobenius deviations normalized
/// by |c|.
struct LocalIdentityCheck {
  double edge_identity_deviation = 0.0;  // sum_e e (x) s~ - |c| Id
  double face_identity_deviation = 0.0;  // sum_f e~ (x) f_out - |c| Id
};

DualGeometry build_dual_geometry(const PrimalMesh& mesh, const GeometricTables& geom);

LocalIdentityCheck check_local_identities(int cell, const PrimalMesh& mesh,
                                          const GeometricTables& geom, const DualGeometry& dual);

enum class SourceVariant { vertex, cell };

/// Integrates an analytic source over dual cells (vertex variant) or primal
/// cells (cell variant) by subsimplex-barycenter quadrature.
DoFArray reduce_dual_source(const ScalarField& s, SourceVariant variant, const PrimalMesh& mesh,
                            const DualGeometry& dual);

}  // namespace cdo

#endif
