#include "cdo/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cdo {

namespace {

std::array<int, 2> sorted_pair(int a, int b) {
  return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
}

Vec3 loop_vertex_average(const PrimalMesh& m, const std::vector<int>& loop) {
  Vec3 s{};
  for (int v : loop) s += m.vertices[v];
  return s / static_cast<double>(loop.size());
}

/// Area vector of a stored loop (fan from the vertex-average point).
Vec3 loop_area(const PrimalMesh& m, const std::vector<int>& loop) {
  const Vec3 apex = loop_vertex_average(m, loop);
  Vec3 area{};
  for (size_t i = 0; i < loop.size(); ++i) {
    const Vec3& a = m.vertices[loop[i]];
    const Vec3& b = m.vertices[loop[(i + 1) % loop.size()]];
    area += 0.5 * cross(a - apex, b - apex);
  }
  return area;
}

/// Divergence-theorem volume of one cell over the committed triangulation.
double cell_volume_raw(const PrimalMesh& m, int c) {
  double vol = 0.0;
  for (const CellFace& cf : m.cells[c]) {
    const std::vector<int>& loop = m.faces[cf.face];
    const Vec3 apex = loop_vertex_average(m, loop);
    for (size_t i = 0; i < loop.size(); ++i) {
      const Vec3& a = m.vertices[loop[i]];
      const Vec3& b = m.vertices[loop[(i + 1) % loop.size()]];
      const Vec3 tri_area = 0.5 * cross(a - apex, b - apex);
      const Vec3 tri_bary = (apex + a + b) / 3.0;
      vol += cf.sign * dot(tri_bary, tri_area) / 3.0;
    }
  }
  return vol;
}

}  // namespace

std::vector<int> PrimalMesh::cell_vertices(int c) const {
  std::set<int> vs;
  for (const CellFace& cf : cells[c])
    for (int v : faces[cf.face]) vs.insert(v);
  return {vs.begin(), vs.end()};
}

std::vector<int> PrimalMesh::cell_edges(int c) const {
  std::set<int> es;
  for (const CellFace& cf : cells[c])
    for (int e : face_edges[cf.face]) es.insert(e);
  return {es.begin(), es.end()};
}

void PrimalMesh::finalize() {
  const int nv = n_vertices();
  const int nf = n_faces();
  const int nc = n_cells();

  for (int f = 0; f < nf; ++f) {
    if (faces[f].size() < 3)
      throw InvalidArgumentError("face " + std::to_string(f) + " has fewer than 3 vertices");
    for (int v : faces[f])
      if (v < 0 || v >= nv)
        throw InvalidArgumentError("face " + std::to_string(f) + " references vertex " +
                                   std::to_string(v) + " out of range");
  }

  // edge table: every loop edge exactly once, as a sorted pair
  std::map<std::array<int, 2>, int> edge_of;
  edges.clear();
  for (int f = 0; f < nf; ++f) {
    const auto& loop = faces[f];
    for (size_t i = 0; i < loop.size(); ++i) {
      const auto key = sorted_pair(loop[i], loop[(i + 1) % loop.size()]);
      if (key[0] == key[1])
        throw InvalidArgumentError("face " + std::to_string(f) + " has a degenerate edge");
      if (!edge_of.count(key)) {
        edge_of[key] = -1;  // assigned below in sorted order
      }
    }
  }
  for (auto& [key, id] : edge_of) {
    id = static_cast<int>(edges.size());
    edges.push_back(key);
  }

  face_edges.assign(nf, {});
  for (int f = 0; f < nf; ++f) {
    const auto& loop = faces[f];
    face_edges[f].reserve(loop.size());
    for (size_t i = 0; i < loop.size(); ++i)
      face_edges[f].push_back(edge_of.at(sorted_pair(loop[i], loop[(i + 1) % loop.size()])));
  }

  // face -> cell incidence with orientation signs
  face_cells.assign(nf, {-1, -1});
  for (int c = 0; c < nc; ++c) {
    for (const CellFace& cf : cells[c]) {
      if (cf.face < 0 || cf.face >= nf)
        throw InvalidArgumentError("cell " + std::to_string(c) + " references face " +
                                   std::to_string(cf.face) + " out of range");
      if (cf.sign != 1 && cf.sign != -1)
        throw InvalidArgumentError("cell " + std::to_string(c) + " has a face sign not in {+1,-1}");
      const int slot = cf.sign > 0 ? 0 : 1;
      if (face_cells[cf.face][slot] != -1)
        throw InvalidArgumentError("face " + std::to_string(cf.face) +
                                   " used twice with the same orientation");
      face_cells[cf.face][slot] = c;
    }
  }
  for (int f = 0; f < nf; ++f)
    if (face_cells[f][0] == -1 && face_cells[f][1] == -1)
      throw InvalidArgumentError("face " + std::to_string(f) + " belongs to no cell");

  face_on_boundary.assign(nf, false);
  edge_on_boundary.assign(edges.size(), false);
  vertex_on_boundary.assign(nv, false);
  for (int f = 0; f < nf; ++f) {
    if (face_cells[f][0] == -1 || face_cells[f][1] == -1) {
      face_on_boundary[f] = true;
      for (int e : face_edges[f]) edge_on_boundary[e] = true;
      for (int v : faces[f]) vertex_on_boundary[v] = true;
    }
  }

  // Euler identity per cell (simply connected polyhedra)
  for (int c = 0; c < nc; ++c) {
    const auto vs = cell_vertices(c);
    const auto es = cell_edges(c);
    const long euler = static_cast<long>(vs.size()) - static_cast<long>(es.size()) +
                       static_cast<long>(cells[c].size());
    if (euler != 2)
      throw DegenerateMeshError("cell " + std::to_string(c) +
                                " violates V - E + F = 2 (got " + std::to_string(euler) + ")");
  }
}

// --- geometry ---------------------------------------------------------------

GeometricTables compute_geometry(const PrimalMesh& mesh) {
  GeometricTables g;
  const int ne = mesh.n_edges();
  const int nf = mesh.n_faces();
  const int nc = mesh.n_cells();

  g.edge_vector.resize(ne);
  g.edge_midpoint.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const auto [v0, v1] = mesh.edges[e];
    g.edge_vector[e] = mesh.vertices[v1] - mesh.vertices[v0];
    g.edge_midpoint[e] = 0.5 * (mesh.vertices[v0] + mesh.vertices[v1]);
  }

  g.face_area.resize(nf);
  g.face_center.resize(nf);
  for (int f = 0; f < nf; ++f) {
    const auto& loop = mesh.faces[f];
    const Vec3 apex = loop_vertex_average(mesh, loop);
    Vec3 area{}, weighted{};
    double wsum = 0.0;
    for (size_t i = 0; i < loop.size(); ++i) {
      const Vec3& a = mesh.vertices[loop[i]];
      const Vec3& b = mesh.vertices[loop[(i + 1) % loop.size()]];
      const Vec3 tri = 0.5 * cross(a - apex, b - apex);
      const double w = norm(tri);
      area += tri;
      weighted += w * ((apex + a + b) / 3.0);
      wsum += w;
    }
    if (wsum <= 0.0)
      throw DegenerateMeshError("face " + std::to_string(f) + " has zero area");
    g.face_area[f] = area;
    g.face_center[f] = weighted / wsum;
  }

  g.cell_volume.resize(nc);
  g.cell_center.resize(nc);
  g.mesh_size = 0.0;
  g.total_volume = 0.0;
  for (int c = 0; c < nc; ++c) {
    const double vol = cell_volume_raw(mesh, c);
    if (!(vol > 0.0))
      throw DegenerateMeshError("cell " + std::to_string(c) + " has nonpositive volume " +
                                std::to_string(vol));
    // centroid by tet decomposition from the cell vertex average
    const auto cvs = mesh.cell_vertices(c);
    Vec3 ref{};
    for (int v : cvs) ref += mesh.vertices[v];
    ref = ref / static_cast<double>(cvs.size());
    double vsum = 0.0;
    Vec3 csum{};
    for (const CellFace& cf : mesh.cells[c]) {
      const auto& loop = mesh.faces[cf.face];
      const Vec3 apex = loop_vertex_average(mesh, loop);
      for (size_t i = 0; i < loop.size(); ++i) {
        const Vec3& a = mesh.vertices[loop[i]];
        const Vec3& b = mesh.vertices[loop[(i + 1) % loop.size()]];
        const double tv =
            cf.sign * dot(cross(apex - ref, a - ref), b - ref) / 6.0;
        vsum += tv;
        csum += tv * ((ref + apex + a + b) / 4.0);
      }
    }
    g.cell_volume[c] = vol;
    g.cell_center[c] = csum / vsum;
    g.total_volume += vol;

    double diam = 0.0;
    for (size_t i = 0; i < cvs.size(); ++i)
      for (size_t j = i + 1; j < cvs.size(); ++j)
        diam = std::max(diam, norm(mesh.vertices[cvs[i]] - mesh.vertices[cvs[j]]));
    g.mesh_size = std::max(g.mesh_size, diam);
  }
  return g;
}

// --- incidence --------------------------------------------------------------

std::vector<double> IntSparse::apply(const std::vector<double>& x) const {
  std::vector<double> y(rows, 0.0);
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    for (int k = offs[i]; k < offs[i + 1]; ++k) s += val[k] * x[idx[k]];
    y[i] = s;
  }
  return y;
}

std::vector<double> IntSparse::apply_transpose(const std::vector<double>& x) const {
  std::vector<double> y(cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int k = offs[i]; k < offs[i + 1]; ++k) y[idx[k]] += val[k] * x[i];
  return y;
}

IntSparse IntSparse::multiply(const IntSparse& other) const {
  IntSparse r;
  r.rows = rows;
  r.cols = other.cols;
  r.offs.assign(rows + 1, 0);
  for (int i = 0; i < rows; ++i) {
    std::map<int, long> row;
    for (int k = offs[i]; k < offs[i + 1]; ++k) {
      const int j = idx[k];
      for (int l = other.offs[j]; l < other.offs[j + 1]; ++l)
        row[other.idx[l]] += static_cast<long>(val[k]) * other.val[l];
    }
    for (auto& [j, v] : row) {
      if (v != 0) {
        r.idx.push_back(j);
        r.val.push_back(static_cast<int>(v));
      }
    }
    r.offs[i + 1] = static_cast<int>(r.idx.size());
  }
  return r;
}

int IntSparse::max_abs() const {
  int m = 0;
  for (int v : val) m = std::max(m, std::abs(v));
  return m;
}

IncidenceMatrices build_incidence(const PrimalMesh& mesh) {
  IncidenceMatrices inc;

  inc.grad.rows = mesh.n_edges();
  inc.grad.cols = mesh.n_vertices();
  inc.grad.offs.assign(inc.grad.rows + 1, 0);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const auto [v0, v1] = mesh.edges[e];
    inc.grad.idx.push_back(v0);  // v0 < v1, columns sorted
    inc.grad.val.push_back(-1);
    inc.grad.idx.push_back(v1);
    inc.grad.val.push_back(1);
    inc.grad.offs[e + 1] = 2 * (e + 1);
  }

  inc.curl.rows = mesh.n_faces();
  inc.curl.cols = mesh.n_edges();
  inc.curl.offs.assign(inc.curl.rows + 1, 0);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const auto& loop = mesh.faces[f];
    std::map<int, int> row;  // sorted columns
    for (size_t i = 0; i < loop.size(); ++i) {
      const int a = loop[i], b = loop[(i + 1) % loop.size()];
      row[mesh.face_edges[f][i]] = (a < b) ? 1 : -1;
    }
    for (auto& [e, s] : row) {
      inc.curl.idx.push_back(e);
      inc.curl.val.push_back(s);
    }
    inc.curl.offs[f + 1] = static_cast<int>(inc.curl.idx.size());
  }

  inc.div.rows = mesh.n_cells();
  inc.div.cols = mesh.n_faces();
  inc.div.offs.assign(inc.div.rows + 1, 0);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    std::map<int, int> row;
    for (const CellFace& cf : mesh.cells[c]) row[cf.face] = cf.sign;
    for (auto& [f, s] : row) {
      inc.div.idx.push_back(f);
      inc.div.val.push_back(s);
    }
    inc.div.offs[c + 1] = static_cast<int>(inc.div.idx.size());
  }
  return inc;
}

// --- generators -------------------------------------------------------------

PrimalMesh build_cartesian_hex(std::array<int, 3> n, const Vec3& box_lo, const Vec3& box_hi) {
  for (int d = 0; d < 3; ++d) {
    if (n[d] < 1) throw InvalidArgumentError("build_cartesian_hex: subdivisions must be >= 1");
    if (!(box_hi[d] > box_lo[d]))
      throw InvalidArgumentError("build_cartesian_hex: degenerate box");
  }
  const int nx = n[0], ny = n[1], nz = n[2];
  PrimalMesh m;

  auto vid = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };
  m.vertices.resize((nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        m.vertices[vid(i, j, k)] = {box_lo.x + (box_hi.x - box_lo.x) * i / nx,
                                    box_lo.y + (box_hi.y - box_lo.y) * j / ny,
                                    box_lo.z + (box_hi.z - box_lo.z) * k / nz};

  // faces with normals along +x, +y, +z
  const int nxf = (nx + 1) * ny * nz;
  const int nyf = nx * (ny + 1) * nz;
  auto xf = [&](int i, int j, int k) { return i * ny * nz + j * nz + k; };
  auto yf = [&](int i, int j, int k) { return nxf + j * nx * nz + i * nz + k; };
  auto zf = [&](int i, int j, int k) { return nxf + nyf + k * nx * ny + i * ny + j; };

  m.faces.resize(nxf + nyf + nx * ny * (nz + 1));
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nz; ++k)
        m.faces[xf(i, j, k)] = {vid(i, j, k), vid(i, j + 1, k), vid(i, j + 1, k + 1),
                                vid(i, j, k + 1)};
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i)
      for (int k = 0; k < nz; ++k)
        m.faces[yf(i, j, k)] = {vid(i, j, k), vid(i, j, k + 1), vid(i + 1, j, k + 1),
                                vid(i + 1, j, k)};
  for (int k = 0; k <= nz; ++k)
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j)
        m.faces[zf(i, j, k)] = {vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k),
                                vid(i, j + 1, k)};

  m.cells.resize(nx * ny * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        auto& cell = m.cells[i + nx * (j + ny * k)];
        cell = {{xf(i, j, k), -1},     {xf(i + 1, j, k), 1}, {yf(i, j, k), -1},
                {yf(i, j + 1, k), 1},  {zf(i, j, k), -1},    {zf(i, j, k + 1), 1}};
      }

  m.finalize();
  return m;
}

PrimalMesh perturb_hex(const PrimalMesh& mesh, double amplitude, std::uint64_t seed) {
  if (amplitude < 0.0 || amplitude >= 0.5)
    throw InvalidArgumentError("perturb_hex: amplitude must lie in [0, 0.5)");
  if (amplitude == 0.0) return mesh;

  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  };

  // Split every quad into two triangles so the committed geometry stays
  // exactly planar after displacement. The diagonal is drawn from the seeded
  // stream per face; a fixed choice leaves every diagonal of a structured
  // grid parallel, and the resulting cancellation pollutes coarse-level
  // convergence fits.
  PrimalMesh out;
  out.vertices = mesh.vertices;
  std::vector<std::vector<int>> face_parts(mesh.n_faces());
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const auto& loop = mesh.faces[f];
    if (loop.size() == 3) {
      face_parts[f] = {static_cast<int>(out.faces.size())};
      out.faces.push_back(loop);
    } else if (loop.size() == 4) {
      const int k = (uniform() < 0.0) ? 0 : 1;
      const int a = loop[k], b = loop[(k + 1) % 4], c = loop[(k + 2) % 4], d = loop[(k + 3) % 4];
      face_parts[f] = {static_cast<int>(out.faces.size()),
                       static_cast<int>(out.faces.size()) + 1};
      out.faces.push_back({a, b, c});
      out.faces.push_back({a, c, d});
    } else {
      throw InvalidArgumentError("perturb_hex: expects a hexahedral mesh (quad faces)");
    }
  }
  out.cells.resize(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (const CellFace& cf : mesh.cells[c])
      for (int part : face_parts[cf.face]) out.cells[c].push_back({part, cf.sign});
  out.finalize();

  // local spacing: shortest incident edge
  std::vector<double> spacing(out.n_vertices(), std::numeric_limits<double>::max());
  for (const auto& [v0, v1] : out.edges) {
    const double len = norm(out.vertices[v1] - out.vertices[v0]);
    spacing[v0] = std::min(spacing[v0], len);
    spacing[v1] = std::min(spacing[v1], len);
  }

  std::vector<std::vector<int>> vertex_cells(out.n_vertices());
  for (int c = 0; c < out.n_cells(); ++c)
    for (int v : out.cell_vertices(c)) vertex_cells[v].push_back(c);

  const double bound = amplitude / std::sqrt(3.0);
  for (int v = 0; v < out.n_vertices(); ++v) {
    if (out.vertex_on_boundary[v]) continue;
    const Vec3 original = out.vertices[v];
    bool placed = false;
    for (int attempt = 0; attempt < 32 && !placed; ++attempt) {
      const Vec3 offset = {uniform() * bound * spacing[v], uniform() * bound * spacing[v],
                           uniform() * bound * spacing[v]};
      out.vertices[v] = original + offset;
      placed = true;
      for (int c : vertex_cells[v]) {
        if (!(cell_volume_raw(out, c) > 0.0)) {
          placed = false;
          break;
        }
      }
    }
    if (!placed) {
      out.vertices[v] = original;
      throw DegenerateMeshError("perturb_hex: could not keep cell volumes positive near vertex " +
                                std::to_string(v));
    }
  }
  return out;
}

namespace {

struct Footprint {
  std::vector<std::array<double, 2>> points;
  std::vector<std::vector<int>> polys;  // CCW loops
};

// Triangular-lattice hexagon: lattice ring m carries 6m boundary vertices, so
// rim ring m decomposes into 6m unit rhombi plus 6 unit corner triangles.
// Every footprint cell is then a unit lattice shape and the family stays
// shape-regular as n_rings grows (fixed-count rings would elongate outward).
Footprint make_footprint(int n_rings) {
  Footprint fp;
  const int nr = n_rings + 1;  // outermost lattice ring, scaled to radius 1
  std::vector<int> start(nr + 1, 0);
  for (int m = 1; m <= nr; ++m) {
    start[m] = static_cast<int>(fp.points.size());
    for (int k = 0; k < 6; ++k) {
      const double a0 = M_PI / 3.0 * k, a1 = M_PI / 3.0 * (k + 1);
      const double cx = std::cos(a0), cy = std::sin(a0);
      const double dx = std::cos(a1) - cx, dy = std::sin(a1) - cy;
      for (int j = 0; j < m; ++j)
        fp.points.push_back({(m * cx + j * dx) / nr, (m * cy + j * dy) / nr});
    }
  }
  auto pid = [&](int m, int k, int j) {
    if (j == m) {  // sector-end corner belongs to the next sector
      ++k;
      j = 0;
    }
    return start[m] + (k % 6) * m + j;
  };
  fp.polys.push_back(
      {pid(1, 0, 0), pid(1, 1, 0), pid(1, 2, 0), pid(1, 3, 0), pid(1, 4, 0), pid(1, 5, 0)});
  for (int m = 1; m < nr; ++m)
    for (int k = 0; k < 6; ++k) {
      for (int j = 0; j < m; ++j)
        fp.polys.push_back({pid(m, k, j), pid(m + 1, k, j), pid(m + 1, k, j + 1), pid(m, k, j + 1)});
      fp.polys.push_back({pid(m, k, m), pid(m + 1, k, m), pid(m + 1, k, m + 1)});
    }
  return fp;
}

}  // namespace

double prismatic_footprint_area(int n_rings) {
  (void)n_rings;  // outer boundary is always the radius-1 hexagon
  // shoelace on the outer hexagon
  double area = 0.0;
  for (int s = 0; s < 6; ++s) {
    const double a0 = M_PI / 3.0 * s, a1 = M_PI / 3.0 * (s + 1);
    area += 0.5 * (std::cos(a0) * std::sin(a1) - std::cos(a1) * std::sin(a0));
  }
  return area;
}

PrimalMesh build_prismatic_polygonal(int n_layers, int n_rings) {
  if (n_layers < 1 || n_rings < 1)
    throw InvalidArgumentError("build_prismatic_polygonal: n_layers and n_rings must be >= 1");

  const Footprint fp = make_footprint(n_rings);
  const int np = static_cast<int>(fp.points.size());

  PrimalMesh m;
  auto vid = [&](int layer, int p) { return layer * np + p; };
  for (int l = 0; l <= n_layers; ++l) {
    const double z = static_cast<double>(l) / n_layers;
    for (int p = 0; p < np; ++p)
      m.vertices.push_back({fp.points[p][0], fp.points[p][1], z});
  }

  // horizontal faces: one per (layer, footprint polygon), loop CCW (normal +z)
  std::vector<std::vector<int>> hface(n_layers + 1,
                                      std::vector<int>(fp.polys.size(), -1));
  for (int l = 0; l <= n_layers; ++l)
    for (size_t q = 0; q < fp.polys.size(); ++q) {
      hface[l][q] = static_cast<int>(m.faces.size());
      std::vector<int> loop;
      for (int p : fp.polys[q]) loop.push_back(vid(l, p));
      m.faces.push_back(loop);
    }

  // vertical faces: one per (layer interval, footprint edge)
  std::map<std::array<int, 2>, std::vector<int>> vface;  // footprint edge -> per-interval ids
  for (const auto& poly : fp.polys) {
    for (size_t i = 0; i < poly.size(); ++i) {
      const auto key = sorted_pair(poly[i], poly[(i + 1) % poly.size()]);
      if (vface.count(key)) continue;
      auto& ids = vface[key];
      for (int l = 0; l < n_layers; ++l) {
        ids.push_back(static_cast<int>(m.faces.size()));
        m.faces.push_back({vid(l, key[0]), vid(l, key[1]), vid(l + 1, key[1]), vid(l + 1, key[0])});
      }
    }
  }

  // cells: prisms; face signs fixed by the outward test against the cell center
  for (int l = 0; l < n_layers; ++l) {
    for (size_t q = 0; q < fp.polys.size(); ++q) {
      std::vector<CellFace> cell;
      cell.push_back({hface[l][q], -1});      // bottom, +z loop points inward
      cell.push_back({hface[l + 1][q], 1});   // top
      const auto& poly = fp.polys[q];
      Vec3 center{};
      for (int p : poly)
        center += m.vertices[vid(l, p)] + m.vertices[vid(l + 1, p)];
      center = center / (2.0 * poly.size());
      for (size_t i = 0; i < poly.size(); ++i) {
        const auto key = sorted_pair(poly[i], poly[(i + 1) % poly.size()]);
        const int fid = vface.at(key)[l];
        const Vec3 area = loop_area(m, m.faces[fid]);
        const Vec3 to_face = loop_vertex_average(m, m.faces[fid]) - center;
        cell.push_back({fid, dot(area, to_face) > 0.0 ? 1 : -1});
      }
      m.cells.push_back(cell);
    }
  }

  m.finalize();
  return m;
}

// --- interchange format ------------------------------------------------------

void write_mesh(const PrimalMesh& mesh, std::ostream& out) {
  nlohmann::json j;
  j["version"] = 1;
  auto& jv = j["vertices"] = nlohmann::json::array();
  for (const Vec3& v : mesh.vertices) jv.push_back({v.x, v.y, v.z});
  j["faces"] = mesh.faces;
  auto& jc = j["cells"] = nlohmann::json::array();
  for (const auto& cell : mesh.cells) {
    nlohmann::json refs = nlohmann::json::array();
    for (const CellFace& cf : cell) refs.push_back(cf.sign * (cf.face + 1));
    jc.push_back(refs);
  }
  out << j.dump(1) << "\n";
}

void write_mesh_file(const PrimalMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_mesh(mesh, out);
}

PrimalMesh read_mesh(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mesh file: parse error: ") + e.what());
  }
  if (!j.contains("version") || !j["version"].is_number_integer() || j["version"] != 1)
    throw ConfigError("mesh file: field 'version' must be the integer 1");
  for (const char* field : {"vertices", "faces", "cells"})
    if (!j.contains(field) || !j[field].is_array())
      throw ConfigError(std::string("mesh file: missing array field '") + field + "'");

  PrimalMesh m;
  for (size_t i = 0; i < j["vertices"].size(); ++i) {
    const auto& v = j["vertices"][i];
    if (!v.is_array() || v.size() != 3)
      throw ConfigError("mesh file: vertices[" + std::to_string(i) + "] is not an [x,y,z] triple");
    m.vertices.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
  }
  for (size_t i = 0; i < j["faces"].size(); ++i) {
    const auto& f = j["faces"][i];
    if (!f.is_array() || f.size() < 3)
      throw ConfigError("mesh file: faces[" + std::to_string(i) + "] needs >= 3 vertex indices");
    std::vector<int> loop;
    for (const auto& v : f) {
      const int vi = v.get<int>();
      if (vi < 0 || vi >= static_cast<int>(m.vertices.size()))
        throw ConfigError("mesh file: faces[" + std::to_string(i) + "] vertex index out of range");
      loop.push_back(vi);
    }
    m.faces.push_back(loop);
  }
  for (size_t i = 0; i < j["cells"].size(); ++i) {
    const auto& cell = j["cells"][i];
    if (!cell.is_array() || cell.empty())
      throw ConfigError("mesh file: cells[" + std::to_string(i) + "] is not a face-reference list");
    std::vector<CellFace> refs;
    for (const auto& r : cell) {
      const int k = r.get<int>();
      if (k == 0 || std::abs(k) > static_cast<int>(m.faces.size()))
        throw ConfigError("mesh file: cells[" + std::to_string(i) +
                          "] has face reference out of range");
      refs.push_back({std::abs(k) - 1, k > 0 ? 1 : -1});
    }
    m.cells.push_back(refs);
  }

  try {
    m.finalize();
    const GeometricTables g = compute_geometry(m);
    // closedness of every cell boundary
    for (int c = 0; c < m.n_cells(); ++c) {
      Vec3 sum{};
      double surf = 0.0;
      for (const CellFace& cf : m.cells[c]) {
        sum += cf.sign * g.face_area[cf.face];
        surf += norm(g.face_area[cf.face]);
      }
      if (norm(sum) > 1e-13 * surf)
        throw DegenerateMeshError("cell " + std::to_string(c) + " boundary is not closed");
    }
  } catch (const DegenerateMeshError&) {
    throw;  // geometric defects keep their own category (and exit code)
  } catch (const Error& e) {
    throw ConfigError(std::string("mesh file: invalid mesh: ") + e.what());
  }
  return m;
}

PrimalMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_mesh(in);
}

}  // namespace cdo
