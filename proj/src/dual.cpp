#include "cdo/dual.hpp"

#include <algorithm>
#include <cmath>

namespace cdo {

int CellDual::local_edge_index(int global_edge) const {
  const auto it = std::lower_bound(edges.begin(), edges.end(), global_edge);
  return (it != edges.end() && *it == global_edge) ? static_cast<int>(it - edges.begin()) : -1;
}

int CellDual::local_face_index(int global_face) const {
  for (size_t i = 0; i < faces.size(); ++i)
    if (faces[i] == global_face) return static_cast<int>(i);
  return -1;
}

DualGeometry build_dual_geometry(const PrimalMesh& mesh, const GeometricTables& geom) {
  DualGeometry dual;
  dual.cells.resize(mesh.n_cells());
  dual.dual_cell_volume.assign(mesh.n_vertices(), 0.0);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    CellDual& cd = dual.cells[c];
    cd.vertices = mesh.cell_vertices(c);
    cd.edges = mesh.cell_edges(c);
    cd.faces.reserve(mesh.cells[c].size());
    for (const CellFace& cf : mesh.cells[c]) cd.faces.push_back(cf.face);

    const int nle = static_cast<int>(cd.edges.size());
    const int nlf = static_cast<int>(cd.faces.size());
    const int nlv = static_cast<int>(cd.vertices.size());
    const Vec3 xc = geom.cell_center[c];

    cd.edge_dual_area.assign(nle, {});
    cd.edge_subvol.assign(nle, 0.0);
    cd.edge_subvol_center.assign(nle, {});
    cd.face_dual_edge.assign(nlf, {});
    cd.face_subvol.assign(nlf, 0.0);
    cd.face_subvol_center.assign(nlf, {});
    cd.vertex_subvol.assign(nlv, 0.0);

    std::vector<Vec3> edge_center_acc(nle, Vec3{});
    std::vector<double> edge_vol_acc(nle, 0.0);
    std::vector<Vec3> face_center_acc(nlf, Vec3{});
    std::vector<double> face_vol_acc(nlf, 0.0);

    auto local_vertex = [&](int v) {
      return static_cast<int>(std::lower_bound(cd.vertices.begin(), cd.vertices.end(), v) -
                              cd.vertices.begin());
    };

    for (int lf = 0; lf < nlf; ++lf) {
      const CellFace& cf = mesh.cells[c][lf];
      const auto& loop = mesh.faces[cf.face];
      const Vec3 xf = geom.face_center[cf.face];

      // dual edge, flipped to align with the outward normal
      const Vec3 f_out = cf.sign * geom.face_area[cf.face];
      Vec3 et = xf - xc;
      if (dot(et, f_out) < 0.0) et = -et;
      cd.face_dual_edge[lf] = et;
      cd.face_subvol[lf] = dot(f_out, et) / 3.0;
      if (!(cd.face_subvol[lf] > 0.0))
        throw DegenerateMeshError("cell " + std::to_string(c) + ": nonpositive subvolume at face " +
                                  std::to_string(cf.face));

      for (size_t i = 0; i < loop.size(); ++i) {
        const int va = loop[i], vb = loop[(i + 1) % loop.size()];
        const int ge = mesh.face_edges[cf.face][i];
        const int le = cd.local_edge_index(ge);
        const Vec3 m = 0.5 * (mesh.vertices[va] + mesh.vertices[vb]);
        const Vec3 evec = geom.edge_vector[ge];

        Vec3 tri = 0.5 * cross(xf - m, xc - m);
        if (dot(tri, evec) < 0.0) tri = -tri;
        cd.edge_dual_area[le] += tri;

        // barycentric subsimplices (x_v, x_e, x_f, x_c) for both endpoints
        for (int v : {va, vb}) {
          SubSimplex s;
          const Vec3& xv = mesh.vertices[v];
          s.volume = std::abs(dot(cross(m - xv, xf - xv), xc - xv)) / 6.0;
          s.barycenter = (xv + m + xf + xc) / 4.0;
          s.local_vertex = local_vertex(v);
          s.local_edge = le;
          s.local_face = lf;
          cd.subsimplices.push_back(s);

          cd.vertex_subvol[s.local_vertex] += s.volume;
          edge_center_acc[le] += s.volume * s.barycenter;
          edge_vol_acc[le] += s.volume;
          face_center_acc[lf] += s.volume * s.barycenter;
          face_vol_acc[lf] += s.volume;
        }
      }
    }

    for (int le = 0; le < nle; ++le) {
      const int ge = cd.edges[le];
      cd.edge_subvol[le] = dot(geom.edge_vector[ge], cd.edge_dual_area[le]) / 3.0;
      if (!(cd.edge_subvol[le] > 0.0))
        throw DegenerateMeshError("cell " + std::to_string(c) + ": nonpositive subvolume at edge " +
                                  std::to_string(ge));
      cd.edge_subvol_center[le] = edge_center_acc[le] / edge_vol_acc[le];
    }
    for (int lf = 0; lf < nlf; ++lf)
      cd.face_subvol_center[lf] = face_center_acc[lf] / face_vol_acc[lf];
    for (int lv = 0; lv < nlv; ++lv) {
      if (!(cd.vertex_subvol[lv] > 0.0))
        throw DegenerateMeshError("cell " + std::to_string(c) +
                                  ": nonpositive subvolume at vertex " +
                                  std::to_string(cd.vertices[lv]));
      dual.dual_cell_volume[cd.vertices[lv]] += cd.vertex_subvol[lv];
    }
  }
  return dual;
}

LocalIdentityCheck check_local_identities(int cell, const PrimalMesh& mesh,
                                          const GeometricTables& geom, const DualGeometry& dual) {
  const CellDual& cd = dual.cells[cell];
  const double vol = geom.cell_volume[cell];

  Mat3 te{}, tf{};
  for (size_t le = 0; le < cd.edges.size(); ++le)
    te += outer(geom.edge_vector[cd.edges[le]], cd.edge_dual_area[le]);
  for (size_t lf = 0; lf < cd.faces.size(); ++lf) {
    const CellFace& cf = mesh.cells[cell][lf];
    tf += outer(cd.face_dual_edge[lf], cf.sign * geom.face_area[cf.face]);
  }

  LocalIdentityCheck out;
  out.edge_identity_deviation = frobenius_norm(te - vol * Mat3::identity()) / vol;
  out.face_identity_deviation = frobenius_norm(tf - vol * Mat3::identity()) / vol;
  return out;
}

DoFArray reduce_dual_source(const ScalarField& s, SourceVariant variant, const PrimalMesh& mesh,
                            const DualGeometry& dual) {
  DoFArray out;
  if (variant == SourceVariant::vertex) {
    out.kind = DoFKind::vertex_potential;
    out.values.assign(mesh.n_vertices(), 0.0);
    for (int c = 0; c < mesh.n_cells(); ++c)
      for (const SubSimplex& ss : dual.cells[c].subsimplices)
        out.values[dual.cells[c].vertices[ss.local_vertex]] += ss.volume * s(ss.barycenter);
  } else {
    out.kind = DoFKind::cell_average;
    out.values.assign(mesh.n_cells(), 0.0);
    for (int c = 0; c < mesh.n_cells(); ++c)
      for (const SubSimplex& ss : dual.cells[c].subsimplices)
        out.values[c] += ss.volume * s(ss.barycenter);
  }
  return out;
}

// Defined here so the cell-average branch can reach the dual subsimplices.
DoFArray de_rham_reduce(DoFKind kind, const ScalarField& scalar, const VectorField& vector,
                        const PrimalMesh& mesh, const GeometricTables& geom,
                        const DualGeometry* dual) {
  DoFArray out;
  out.kind = kind;
  switch (kind) {
    case DoFKind::vertex_potential: {
      out.values.reserve(mesh.n_vertices());
      for (const Vec3& x : mesh.vertices) out.values.push_back(scalar(x));
      break;
    }
    case DoFKind::edge_circulation: {
      // 3-point Gauss-Legendre on the straight segment
      static const double t[3] = {0.5 - std::sqrt(15.0) / 10.0, 0.5,
                                  0.5 + std::sqrt(15.0) / 10.0};
      static const double w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
      out.values.reserve(mesh.n_edges());
      for (int e = 0; e < mesh.n_edges(); ++e) {
        const Vec3 x0 = mesh.vertices[mesh.edges[e][0]];
        const Vec3 ev = geom.edge_vector[e];
        double s_acc = 0.0;
        for (int q = 0; q < 3; ++q) s_acc += w[q] * dot(vector(x0 + t[q] * ev), ev);
        out.values.push_back(s_acc);
      }
      break;
    }
    case DoFKind::face_flux: {
      // degree-2 (edge-midpoint) rule on each fan triangle
      out.values.assign(mesh.n_faces(), 0.0);
      for (int f = 0; f < mesh.n_faces(); ++f) {
        const auto& loop = mesh.faces[f];
        Vec3 apex{};
        for (int v : loop) apex += mesh.vertices[v];
        apex = apex / static_cast<double>(loop.size());
        double flux = 0.0;
        for (size_t i = 0; i < loop.size(); ++i) {
          const Vec3& a = mesh.vertices[loop[i]];
          const Vec3& b = mesh.vertices[loop[(i + 1) % loop.size()]];
          const Vec3 tri = 0.5 * cross(a - apex, b - apex);
          const Vec3 q0 = 0.5 * (apex + a), q1 = 0.5 * (a + b), q2 = 0.5 * (b + apex);
          flux += (dot(vector(q0), tri) + dot(vector(q1), tri) + dot(vector(q2), tri)) / 3.0;
        }
        out.values[f] = flux;
      }
      break;
    }
    case DoFKind::cell_average: {
      if (!dual)
        throw InvalidArgumentError("de_rham_reduce: cell-average reduction needs a DualGeometry");
      const DoFArray r = reduce_dual_source(scalar, SourceVariant::cell, mesh, *dual);
      out.values = r.values;
      break;
    }
    default:
      throw InvalidArgumentError("de_rham_reduce: unknown DoF kind");
  }
  return out;
}

}  // namespace cdo
