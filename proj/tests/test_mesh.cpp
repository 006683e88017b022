#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cdo/dual.hpp"
#include "cdo/mesh.hpp"

using namespace cdo;

namespace {

// lattice entity counts for an nx x ny x nz hex grid
int lattice_vertices(int nx, int ny, int nz) { return (nx + 1) * (ny + 1) * (nz + 1); }
int lattice_edges(int nx, int ny, int nz) {
  return nx * (ny + 1) * (nz + 1) + (nx + 1) * ny * (nz + 1) + (nx + 1) * (ny + 1) * nz;
}
int lattice_faces(int nx, int ny, int nz) {
  return (nx + 1) * ny * nz + nx * (ny + 1) * nz + nx * ny * (nz + 1);
}

}  // namespace

TEST_CASE("cartesian generator entity counts and volumes") {
  const PrimalMesh m = build_cartesian_hex({2, 3, 4}, {0, 0, 0}, {1, 1, 1});
  CHECK(m.n_vertices() == lattice_vertices(2, 3, 4));
  CHECK(m.n_edges() == lattice_edges(2, 3, 4));
  CHECK(m.n_faces() == lattice_faces(2, 3, 4));
  CHECK(m.n_cells() == 24);

  const GeometricTables g = compute_geometry(m);
  CHECK(g.total_volume == doctest::Approx(1.0).epsilon(1e-14));
  for (double v : g.cell_volume)
    CHECK(v == doctest::Approx(1.0 / 24.0).epsilon(1e-13));
  CHECK(g.mesh_size == doctest::Approx(std::sqrt(0.25 + 1.0 / 9.0 + 1.0 / 16.0)));
}

TEST_CASE("single-cell cube geometry") {
  const PrimalMesh m = build_cartesian_hex({1, 1, 1}, {0, 0, 0}, {1, 1, 1});
  const GeometricTables g = compute_geometry(m);
  CHECK(m.n_cells() == 1);
  CHECK(g.cell_volume[0] == doctest::Approx(1.0));
  CHECK(norm(g.cell_center[0] - Vec3{0.5, 0.5, 0.5}) < 1e-14);
  for (int f = 0; f < m.n_faces(); ++f) CHECK(norm(g.face_area[f]) == doctest::Approx(1.0));
  for (const auto& e : m.edges) CHECK(e[0] < e[1]);
}

TEST_CASE("finalize rejects an open cell") {
  PrimalMesh m = build_cartesian_hex({1, 1, 1}, {0, 0, 0}, {1, 1, 1});
  m.cells[0].pop_back();
  m.edges.clear();
  CHECK_THROWS_AS(m.finalize(), Error);
}

TEST_CASE("incidence matrices satisfy the complex identities") {
  for (int variant = 0; variant < 3; ++variant) {
    PrimalMesh m;
    if (variant == 0) m = build_cartesian_hex({3, 3, 3}, {0, 0, 0}, {1, 1, 1});
    if (variant == 1)
      m = perturb_hex(build_cartesian_hex({3, 3, 3}, {0, 0, 0}, {1, 1, 1}), 0.2, 42);
    if (variant == 2) m = build_prismatic_polygonal(2, 2);

    const IncidenceMatrices inc = build_incidence(m);
    CHECK(inc.grad.rows == m.n_edges());
    CHECK(inc.curl.rows == m.n_faces());
    CHECK(inc.div.rows == m.n_cells());
    CHECK(inc.curl.multiply(inc.grad).max_abs() == 0);
    CHECK(inc.div.multiply(inc.curl).max_abs() == 0);
    // gradient rows sum to zero
    for (int e = 0; e < inc.grad.rows; ++e) {
      int s = 0;
      for (int k = inc.grad.offs[e]; k < inc.grad.offs[e + 1]; ++k) s += inc.grad.val[k];
      CHECK(s == 0);
    }
  }
}

TEST_CASE("de Rham reductions commute with the discrete operators") {
  const PrimalMesh m = perturb_hex(build_cartesian_hex({3, 3, 3}, {0, 0, 0}, {1, 1, 1}), 0.2, 5);
  const GeometricTables g = compute_geometry(m);
  const DualGeometry dual = build_dual_geometry(m, g);
  const IncidenceMatrices inc = build_incidence(m);

  // cubic potential: gradient is quadratic, inside the edge rule's exactness
  const ScalarField p = [](const Vec3& x) {
    return x.x * x.x * x.x - 2.0 * x.y * x.y * x.z + x.x * x.y + 3.0 * x.z;
  };
  const VectorField grad_p = [](const Vec3& x) {
    return Vec3{3.0 * x.x * x.x + x.y, -4.0 * x.y * x.z + x.x, -2.0 * x.y * x.y + 3.0};
  };
  const DoFArray pv = de_rham_vertex(p, m, g);
  const DoFArray ge = de_rham_edge(grad_p, m, g);
  const std::vector<double> gpv = inc.grad.apply(pv.values);
  for (int e = 0; e < m.n_edges(); ++e) CHECK(std::abs(gpv[e] - ge.values[e]) < 1e-12);

  // quadratic vector field: curl and divergence stay within the face/cell rules
  const VectorField u = [](const Vec3& x) {
    return Vec3{x.y * x.z, x.x * x.x - x.z, x.x * x.y + x.z * x.z};
  };
  const VectorField curl_u = [](const Vec3& x) {
    return Vec3{x.x + 1.0, x.y - x.y, 2.0 * x.x - x.z};
  };
  const ScalarField div_u = [](const Vec3& x) { return 2.0 * x.z; };

  const DoFArray ue = de_rham_edge(u, m, g);
  const DoFArray cf = de_rham_face(curl_u, m, g);
  const std::vector<double> cue = inc.curl.apply(ue.values);
  for (int f = 0; f < m.n_faces(); ++f) CHECK(std::abs(cue[f] - cf.values[f]) < 1e-12);

  const DoFArray uf = de_rham_face(u, m, g);
  const DoFArray dc = de_rham_reduce(DoFKind::cell_average, div_u, {}, m, g, &dual);
  const std::vector<double> duf = inc.div.apply(uf.values);
  for (int c = 0; c < m.n_cells(); ++c) CHECK(std::abs(duf[c] - dc.values[c]) < 1e-12);
}

TEST_CASE("perturb_hex contract") {
  const PrimalMesh base = build_cartesian_hex({3, 3, 3}, {0, 0, 0}, {1, 1, 1});
  CHECK_THROWS_AS(perturb_hex(base, 0.5, 1), InvalidArgumentError);
  CHECK_THROWS_AS(perturb_hex(base, -0.1, 1), InvalidArgumentError);

  const PrimalMesh same = perturb_hex(base, 0.0, 1);
  CHECK(same.vertices.size() == base.vertices.size());
  CHECK(same.n_faces() == base.n_faces());

  const PrimalMesh p1 = perturb_hex(base, 0.2, 42);
  const PrimalMesh p2 = perturb_hex(base, 0.2, 42);
  const PrimalMesh p3 = perturb_hex(base, 0.2, 43);
  CHECK(p1.vertices.size() == base.vertices.size());
  CHECK(p1.n_faces() == 2 * base.n_faces());  // every quad split
  bool identical = true, differs = false;
  for (size_t v = 0; v < p1.vertices.size(); ++v) {
    if (norm(p1.vertices[v] - p2.vertices[v]) != 0.0) identical = false;
    if (norm(p1.vertices[v] - p3.vertices[v]) != 0.0) differs = true;
  }
  CHECK(identical);
  CHECK(differs);

  // boundary fixed, interior moved, volumes positive
  bool moved = false;
  for (int v = 0; v < p1.n_vertices(); ++v) {
    if (p1.vertex_on_boundary[v])
      CHECK(norm(p1.vertices[v] - base.vertices[v]) == 0.0);
    else if (norm(p1.vertices[v] - base.vertices[v]) > 0.0)
      moved = true;
  }
  CHECK(moved);
  const GeometricTables g = compute_geometry(p1);
  for (double vol : g.cell_volume) CHECK(vol > 0.0);
  CHECK(g.total_volume == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("prismatic generator geometry") {
  const double footprint = prismatic_footprint_area(2);
  CHECK(footprint == doctest::Approx(3.0 * std::sqrt(3.0) / 2.0).epsilon(1e-14));

  const PrimalMesh m = build_prismatic_polygonal(3, 2);
  const GeometricTables g = compute_geometry(m);
  // hexagon core + rim ring m with 6m rhombi and 6 corner triangles, 3 layers
  CHECK(m.n_cells() == 3 * (1 + (6 + 6) + (12 + 6)));
  CHECK(g.total_volume == doctest::Approx(footprint).epsilon(1e-13));
  for (double vol : g.cell_volume) CHECK(vol > 0.0);
  CHECK_THROWS_AS(build_prismatic_polygonal(0, 1), InvalidArgumentError);
}

TEST_CASE("mesh file round-trip") {
  const PrimalMesh m = perturb_hex(build_cartesian_hex({2, 2, 2}, {0, 0, 0}, {1, 1, 1}), 0.15, 9);
  std::stringstream ss;
  write_mesh(m, ss);
  const PrimalMesh r = read_mesh(ss);
  REQUIRE(r.n_vertices() == m.n_vertices());
  REQUIRE(r.n_faces() == m.n_faces());
  REQUIRE(r.n_cells() == m.n_cells());
  for (int v = 0; v < m.n_vertices(); ++v) CHECK(norm(r.vertices[v] - m.vertices[v]) == 0.0);
  for (int f = 0; f < m.n_faces(); ++f) CHECK(r.faces[f] == m.faces[f]);
  for (int c = 0; c < m.n_cells(); ++c) {
    REQUIRE(r.cells[c].size() == m.cells[c].size());
    for (size_t i = 0; i < m.cells[c].size(); ++i) {
      CHECK(r.cells[c][i].face == m.cells[c][i].face);
      CHECK(r.cells[c][i].sign == m.cells[c][i].sign);
    }
  }
}

TEST_CASE("mesh reader rejects malformed input") {
  std::stringstream bad1("this is not json");
  CHECK_THROWS_AS(read_mesh(bad1), ConfigError);
  std::stringstream bad2(R"({"version": 2, "vertices": [], "faces": [], "cells": []})");
  CHECK_THROWS_AS(read_mesh(bad2), ConfigError);
  std::stringstream bad3(R"({"version": 1, "vertices": [[0,0]], "faces": [], "cells": []})");
  CHECK_THROWS_AS(read_mesh(bad3), ConfigError);
}

TEST_CASE("compute_geometry names a degenerate cell") {
  PrimalMesh m = build_cartesian_hex({1, 1, 1}, {0, 0, 0}, {1, 1, 1});
  for (Vec3& v : m.vertices) v.z = -v.z;  // mirror: orientation flips, volume < 0
  try {
    compute_geometry(m);
    FAIL("expected DegenerateMeshError");
  } catch (const DegenerateMeshError& e) {
    CHECK(std::string(e.what()).find("cell 0") != std::string::npos);
  }
}
