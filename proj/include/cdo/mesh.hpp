// Primal polyhedral mesh: generators, geometry, signed incidence matrices
// (the discrete gradient / curl / divergence), de Rham reduction maps and a
// text interchange format.
//
// Orientation conventions:
//   - edges run from the lower to the higher vertex index;
//   - a face is its stored vertex loop; the loop order defines its normal;
//   - a cell stores per-face signs, +1 when the stored loop is
//     counterclockwise seen from outside the cell.

#ifndef CDO_MESH_HPP
#define CDO_MESH_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cdo/core.hpp"

namespace cdo {

struct DualGeometry;  // dual.hpp

struct CellFace {
  int face = -1;
  int sign = 0;  // +1: stored loop outward, -1: reversed
};

struct PrimalMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 2>> edges;   // v0 < v1, derived by finalize()
  std::vector<std::vector<int>> faces;     // vertex loops, >= 3 entries
  std::vector<std::vector<CellFace>> cells;

  std::vector<bool> vertex_on_boundary;
  std::vector<bool> edge_on_boundary;
  std::vector<bool> face_on_boundary;

  // derived connectivity (finalize())
  std::vector<std::vector<int>> face_edges;        // aligned with the loop
  std::vector<std::array<int, 2>> face_cells;      // {+cell, -cell}, -1 if none

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_faces() const { return static_cast<int>(faces.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }

  /// Sorted unique vertex/edge ids of a cell.
  std::vector<int> cell_vertices(int c) const;
  std::vector<int> cell_edges(int c) const;

  /// Derives edges, face->edge and face->cell incidence and boundary flags;
  /// validates the topological invariants. Throws InvalidArgumentError /
  /// DegenerateMeshError with entity attribution.
  void finalize();
};

struct GeometricTables {
  std::vector<Vec3> edge_vector;    // v1 - v0
  std::vector<Vec3> edge_midpoint;
  std::vector<Vec3> face_area;      // loop orientation
  std::vector<Vec3> face_center;    // area centroid of the fan triangulation
  std::vector<Vec3> cell_center;
  std::vector<double> cell_volume;
  double mesh_size = 0.0;           // max cell diameter
  double total_volume = 0.0;
};

/// Integer sparse matrix with +-1 entries (CSR).
struct IntSparse {
  int rows = 0, cols = 0;
  std::vector<int> offs, idx;
  std::vector<int> val;

  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> apply_transpose(const std::vector<double>& x) const;
  IntSparse multiply(const IntSparse& other) const;  // exact integer product
  int max_abs() const;
};

struct IncidenceMatrices {
  IntSparse grad;  // E x V
  IntSparse curl;  // F x E
  IntSparse div;   // C x F
};

enum class DoFKind { vertex_potential, edge_circulation, face_flux, cell_average };

struct DoFArray {
  DoFKind kind = DoFKind::vertex_potential;
  std::vector<double> values;
};

// --- generators -------------------------------------------------------------

PrimalMesh build_cartesian_hex(std::array<int, 3> n, const Vec3& box_lo, const Vec3& box_hi);

/// Displaces interior vertices by a seeded pseudo-random offset bounded by
/// amplitude x local spacing. With amplitude > 0 every quad face is first
/// split into two triangles (diagonal at the lowest vertex id) so the
/// committed geometry stays exactly planar; amplitude == 0 returns the input
/// unchanged.
PrimalMesh perturb_hex(const PrimalMesh& mesh, double amplitude, std::uint64_t seed);

/// Prisms over a polygonal footprint (hexagonal core + n_rings rings of
/// quadrilaterals), extruded in z over [0,1] with n_layers layers.
PrimalMesh build_prismatic_polygonal(int n_layers, int n_rings);

/// Exact footprint area of the prismatic generator (shoelace on the outer
/// polygon), for volume oracles.
double prismatic_footprint_area(int n_rings);

// --- geometry / incidence / reductions --------------------------------------

GeometricTables compute_geometry(const PrimalMesh& mesh);

IncidenceMatrices build_incidence(const PrimalMesh& mesh);

DoFArray de_rham_reduce(DoFKind kind, const ScalarField& scalar, const VectorField& vector,
                        const PrimalMesh& mesh, const GeometricTables& geom,
                        const DualGeometry* dual = nullptr);

inline DoFArray de_rham_vertex(const ScalarField& f, const PrimalMesh& m, const GeometricTables& g) {
  return de_rham_reduce(DoFKind::vertex_potential, f, {}, m, g);
}
inline DoFArray de_rham_edge(const VectorField& f, const PrimalMesh& m, const GeometricTables& g) {
  return de_rham_reduce(DoFKind::edge_circulation, {}, f, m, g);
}
inline DoFArray de_rham_face(const VectorField& f, const PrimalMesh& m, const GeometricTables& g) {
  return de_rham_reduce(DoFKind::face_flux, {}, f, m, g);
}

// --- interchange format ------------------------------------------------------

void write_mesh(const PrimalMesh& mesh, std::ostream& out);
void write_mesh_file(const PrimalMesh& mesh, const std::string& path);
PrimalMesh read_mesh(std::istream& in);
PrimalMesh read_mesh_file(const std::string& path);

}  // namespace cdo

#endif
